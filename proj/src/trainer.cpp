#include "frlab/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "frlab/checkpoint.hpp"
#include "frlab/threadpool.hpp"

namespace frlab {

namespace {

std::vector<std::string> metrics_columns() {
  std::vector<std::string> cols = {"iteration",   "steps",        "mean_reward",
                                   "success_rate", "episodes",    "mean_level",
                                   "sim_faults",  "policy_loss",  "value_loss",
                                   "entropy",     "approx_kl",    "lr",
                                   "ppo_epochs",  "mcp_mass_mse", "mcp_contact_bce",
                                   "mcp_recon_mse", "mcp_kl",     "mcp_total"};
  for (int i = 0; i < RewardBreakdown::kNumTerms; ++i)
    cols.push_back(std::string("rew_") + RewardBreakdown::term_name(i));
  return cols;
}

}  // namespace

Trainer::Trainer(const Config& cfg)
    : cfg_(cfg), root_rng_(cfg.train.seed), trainer_rng_(0) {}

void Trainer::init() {
  if (initialized_) return;
  trainer_rng_ = root_rng_.spawn(0x7001);

  families_.clear();
  for (const std::string& name : cfg_.train.terrain_families)
    families_.push_back(terrain_family_from_string(name));
  if (families_.empty()) families_.push_back(TerrainFamily::Flat);

  terrains_.assign(families_.size(), {});
  for (size_t f = 0; f < families_.size(); ++f) {
    terrains_[f].reserve(10);
    for (int level = 1; level <= 10; ++level) {
      terrains_[f].push_back(
          generate_terrain(families_[f], level, cfg_.train.seed * 977 + level, cfg_.terrain));
    }
  }

  const int E = cfg_.train.envs;
  envs_.clear();
  envs_.reserve(E);
  curriculum_.assign(E, CurriculumState());
  for (int e = 0; e < E; ++e) {
    envs_.emplace_back(&cfg_, static_cast<uint64_t>(e + 1), root_rng_);
    curriculum_[e].family = families_[e % families_.size()];
    curriculum_[e].level = std::clamp(cfg_.train.start_level, 1, 10);
    envs_[e].set_terrain(&terrains_[e % families_.size()][curriculum_[e].level - 1]);
  }

  Rng net_rng = root_rng_.spawn(0x7002);
  ac_ = ActorCritic<float>(cfg_.policy);
  ac_.init(net_rng);
  policy_opt_ = Adam<float>(ac_.num_params(), cfg_.ppo.lr);
  mcp_ = McpNet<float>(cfg_.mcp, cfg_.train.no_mass, cfg_.train.no_col, cfg_.train.no_est);
  mcp_.init(net_rng);
  mcp_enc_opt_ = Adam<float>(static_cast<int>(mcp_.encoder().params().size()), cfg_.mcp.lr);
  mcp_dec_opt_ = Adam<float>(static_cast<int>(mcp_.decoder().params().size()), cfg_.mcp.lr);

  batch_.resize(E, cfg_.train.horizon);
  raw_o_rows_.setZero(batch_.rows(), kObsDim);
  raw_s_rows_.setZero(batch_.rows(), kPrivilegedDim);
  cur_hist_.setZero(E, kHistoryLen * kObsDim);
  cur_p_.setZero(E, kPolicyDim);
  cur_s_.setZero(E, kPrivilegedDim);
  cur_s_raw_.setZero(E, kPrivilegedDim);

  pool_ = std::make_unique<ThreadPool>(cfg_.train.workers);
  pool_->parallel_for(E, [&](int e) { envs_[e].start_episode(); });
  pool_->parallel_for(E, [&](int e) { envs_[e].observe(norm_o_, true); });
  build_current_inputs();
  initialized_ = true;
}

void Trainer::build_current_inputs() {
  const int E = static_cast<int>(envs_.size());
  for (int e = 0; e < E; ++e) cur_hist_.row(e) = envs_[e].history_flat().transpose();
  Eigen::MatrixXf noise(E, kLatentDim);
  for (int e = 0; e < E; ++e)
    for (int k = 0; k < kLatentDim; ++k)
      noise(e, k) = static_cast<float>(envs_[e].rng().normal());
  auto heads = mcp_.encode(cur_hist_, &noise);
  pool_->parallel_for(E, [&](int e) {
    Eigen::Vector4f m_hat = heads.m_hat.row(e).transpose();
    VecXf c_hat = heads.c_hat.row(e).transpose();
    VecXf z_hat = heads.z.row(e).transpose();
    cur_p_.row(e) = build_p(envs_[e].current_obs(), m_hat, c_hat, z_hat).transpose();
    VecXf s_raw = envs_[e].build_privileged(envs_[e].current_obs());
    cur_s_raw_.row(e) = s_raw.transpose();
    cur_s_.row(e) = norm_s_.normalize(s_raw).transpose();
  });
}

void Trainer::rollout(IterationStats& stats) {
  const int E = static_cast<int>(envs_.size());
  const int H = cfg_.train.horizon;
  ThreadPool& pool = *pool_;

  for (int t = 0; t < H; ++t) {
    Eigen::MatrixXf mean = ac_.actor.forward(cur_p_);
    Eigen::MatrixXf values = ac_.critic.forward(cur_s_);

    Eigen::MatrixXf actions(E, kActionDim);
    for (int e = 0; e < E; ++e) {
      for (int j = 0; j < kActionDim; ++j) {
        float sigma = std::exp(ac_.log_std[j]);
        actions(e, j) = mean(e, j) + sigma * static_cast<float>(envs_[e].rng().normal());
      }
    }
    Eigen::VectorXf logp = ac_.log_prob(mean, actions);

    for (int e = 0; e < E; ++e) {
      const int row = t * E + e;
      batch_.policy_obs.row(row) = cur_p_.row(e);
      batch_.privileged.row(row) = cur_s_.row(e);
      batch_.actions.row(row) = actions.row(e);
      batch_.log_probs[row] = logp[e];
      batch_.values[row] = values(e, 0);
      batch_.histories.row(row) = cur_hist_.row(e);
      batch_.mass_targets.row(row) = envs_[e].mass_target().transpose();
      batch_.contact_targets.row(row) = envs_[e].contact_target().transpose();
      raw_o_rows_.row(row) = envs_[e].last_raw_obs().transpose();
      raw_s_rows_.row(row) = cur_s_raw_.row(e);
    }

    std::vector<Env::StepInfo> infos(E);
    pool.parallel_for(E, [&](int e) { infos[e] = envs_[e].apply_action(actions.row(e)); });

    // Value bootstrap for time-limit terminations, computed before resets.
    std::vector<int> timeout_envs;
    Eigen::MatrixXf term_s;
    for (int e = 0; e < E; ++e) {
      if (infos[e].episode_ended && !infos[e].fault) timeout_envs.push_back(e);
    }
    if (cfg_.train.bootstrap_timeouts && !timeout_envs.empty()) {
      term_s.resize(static_cast<int>(timeout_envs.size()), kPrivilegedDim);
      for (size_t i = 0; i < timeout_envs.size(); ++i) {
        int e = timeout_envs[i];
        VecXf o_n =
            norm_o_.normalize(build_o(envs_[e].state(), envs_[e].prev_action()));
        VecXf s_raw = envs_[e].build_privileged(o_n);
        term_s.row(static_cast<int>(i)) = norm_s_.normalize(s_raw).transpose();
      }
      Eigen::MatrixXf term_v = ac_.critic.forward(term_s);
      for (size_t i = 0; i < timeout_envs.size(); ++i) {
        int e = timeout_envs[i];
        infos[e].reward += static_cast<float>(cfg_.ppo.gamma) * term_v(static_cast<int>(i), 0);
      }
    }

    for (int e = 0; e < E; ++e) {
      const int row = t * E + e;
      batch_.rewards[row] = infos[e].reward;
      batch_.dones[row] = infos[e].done ? 1.0f : 0.0f;
      auto terms = infos[e].breakdown.terms();
      for (int k = 0; k < RewardBreakdown::kNumTerms; ++k) stats.term_means[k] += terms[k];

      if (infos[e].episode_ended) {
        stats.episodes_finished++;
        if (infos[e].fault) stats.sim_faults++;
        if (infos[e].result.success) stats.success_rate += 1.0;
        CurriculumState next = update_level(curriculum_[e], infos[e].result.success,
                                            infos[e].result.displacement, envs_[e].rng());
        if (!cfg_.train.curriculum) next.level = curriculum_[e].level;
        curriculum_[e] = next;
        envs_[e].set_terrain(
            &terrains_[e % families_.size()][curriculum_[e].level - 1]);
        envs_[e].start_episode();
      }
    }

    pool.parallel_for(E, [&](int e) { envs_[e].observe(norm_o_, true); });
    for (int e = 0; e < E; ++e) {
      const int row = t * E + e;
      batch_.next_obs.row(row) = envs_[e].current_obs().transpose();
      batch_.recon_mask[row] = infos[e].done ? 0.0f : 1.0f;
    }
    build_current_inputs();
  }

  Eigen::MatrixXf boot_v = ac_.critic.forward(cur_s_);
  for (int e = 0; e < E; ++e) batch_.bootstrap[e] = boot_v(e, 0);

  const int rows = batch_.rows();
  for (int r = 0; r < rows; ++r) stats.mean_reward += batch_.rewards[r];
  stats.mean_reward /= rows;
  for (int k = 0; k < RewardBreakdown::kNumTerms; ++k) stats.term_means[k] /= rows;
  if (stats.episodes_finished > 0) stats.success_rate /= stats.episodes_finished;
  for (int e = 0; e < E; ++e) stats.mean_level += curriculum_[e].level;
  stats.mean_level /= E;
}

void Trainer::update_normalizers() {
  norm_o_.update(raw_o_rows_);
  norm_s_.update(raw_s_rows_);
}

McpLossTerms<float> Trainer::mcp_update() {
  const int N = batch_.rows();
  const int mb = std::max(1, N / std::max(1, cfg_.ppo.minibatches));
  McpLossTerms<float> acc;
  int steps = 0;
  for (int epoch = 0; epoch < cfg_.ppo.epochs; ++epoch) {
    Eigen::MatrixXf hist(mb, kHistoryLen * kObsDim), m_t(mb, kMassDim), c_t(mb, kContactDim),
        o_next(mb, kObsDim), noise(mb, kLatentDim);
    Eigen::VectorXf mask(mb);
    for (int i = 0; i < mb; ++i) {
      int src = static_cast<int>(trainer_rng_.uniform_int(static_cast<uint32_t>(N)));
      hist.row(i) = batch_.histories.row(src);
      m_t.row(i) = batch_.mass_targets.row(src);
      c_t.row(i) = batch_.contact_targets.row(src);
      o_next.row(i) = batch_.next_obs.row(src);
      mask[i] = batch_.recon_mask[src];
      for (int k = 0; k < kLatentDim; ++k)
        noise(i, k) = static_cast<float>(trainer_rng_.normal());
    }
    Eigen::VectorXf g_enc = Eigen::VectorXf::Zero(mcp_.encoder().params().size());
    Eigen::VectorXf g_dec = Eigen::VectorXf::Zero(mcp_.decoder().params().size());
    McpLossTerms<float> terms =
        mcp_.loss_and_grad(hist, m_t, c_t, o_next, mask, noise, g_enc, g_dec);
    clip_grad_norm(g_enc, cfg_.ppo.max_grad_norm);
    clip_grad_norm(g_dec, cfg_.ppo.max_grad_norm);
    mcp_enc_opt_.step(mcp_.encoder().params(), g_enc);
    if (!mcp_.no_est()) mcp_dec_opt_.step(mcp_.decoder().params(), g_dec);
    acc.mass_mse += terms.mass_mse;
    acc.contact_bce += terms.contact_bce;
    acc.recon_mse += terms.recon_mse;
    acc.kl += terms.kl;
    acc.lambda_m = terms.lambda_m;
    acc.lambda_c = terms.lambda_c;
    acc.lambda_rec = terms.lambda_rec;
    acc.lambda_kl = terms.lambda_kl;
    steps++;
  }
  if (steps > 0) {
    acc.mass_mse /= steps;
    acc.contact_bce /= steps;
    acc.recon_mse /= steps;
    acc.kl /= steps;
  }
  return acc;
}

IterationStats Trainer::run_iteration() {
  init();
  IterationStats stats;
  stats.iteration = iteration_ + 1;
  rollout(stats);
  update_normalizers();
  batch_.compute_gae(cfg_.ppo.gamma, cfg_.ppo.lam);
  stats.ppo = ppo_update(batch_, ac_, policy_opt_, cfg_.ppo, trainer_rng_);
  stats.mcp = mcp_update();
  stats.mcp_valid = true;
  iteration_++;
  return stats;
}

void Trainer::save_checkpoint(const std::string& path) const {
  Checkpoint ckpt;
  ckpt.add_scalar("meta.iteration", iteration_);
  ckpt.add_scalar("meta.envs", static_cast<double>(envs_.size()));
  ckpt.add("actor.params", ac_.actor.params());
  ckpt.add("actor.log_std", ac_.log_std);
  ckpt.add("critic.params", ac_.critic.params());
  ckpt.add("policy.adam.m", policy_opt_.moment1());
  ckpt.add("policy.adam.v", policy_opt_.moment2());
  ckpt.add_scalar("policy.adam.t", static_cast<double>(policy_opt_.step_count()));
  ckpt.add_raw_doubles("policy.lr", {policy_opt_.lr()});
  ckpt.add("mcp.encoder.params", mcp_.encoder().params());
  ckpt.add("mcp.decoder.params", mcp_.decoder().params());
  ckpt.add("mcp.adam_enc.m", mcp_enc_opt_.moment1());
  ckpt.add("mcp.adam_enc.v", mcp_enc_opt_.moment2());
  ckpt.add_scalar("mcp.adam_enc.t", static_cast<double>(mcp_enc_opt_.step_count()));
  ckpt.add("mcp.adam_dec.m", mcp_dec_opt_.moment1());
  ckpt.add("mcp.adam_dec.v", mcp_dec_opt_.moment2());
  ckpt.add_scalar("mcp.adam_dec.t", static_cast<double>(mcp_dec_opt_.step_count()));
  ckpt.add("norm_o.mean", norm_o_.mean());
  ckpt.add("norm_o.var", norm_o_.var());
  ckpt.add_scalar("norm_o.count", norm_o_.count());
  ckpt.add("norm_s.mean", norm_s_.mean());
  ckpt.add("norm_s.var", norm_s_.var());
  ckpt.add_scalar("norm_s.count", norm_s_.count());
  ckpt.add_raw_u64("trainer.rng", {trainer_rng_.state(), trainer_rng_.inc()});
  ckpt.add_raw_u64("root.rng", {root_rng_.state(), root_rng_.inc()});

  std::vector<double> cur;
  cur.reserve(envs_.size() * 2);
  for (size_t e = 0; e < envs_.size(); ++e) {
    cur.push_back(static_cast<double>(curriculum_[e].level));
    cur.push_back(static_cast<double>(curriculum_[e].promotions));
    cur.push_back(static_cast<double>(curriculum_[e].demotions));
  }
  ckpt.add_raw_doubles("curriculum.levels", cur);

  ckpt.add("carried.hist", cur_hist_);
  ckpt.add("carried.p", cur_p_);
  ckpt.add("carried.s", cur_s_);
  ckpt.add("carried.s_raw", cur_s_raw_);

  for (size_t e = 0; e < envs_.size(); ++e)
    envs_[e].serialize(ckpt, "env" + std::to_string(e));
  ckpt.save(path);
}

void Trainer::load_checkpoint(const std::string& path) {
  init();
  Checkpoint ckpt = Checkpoint::load(path);
  iteration_ = static_cast<int>(ckpt.get_scalar("meta.iteration"));
  int envs_in = static_cast<int>(ckpt.get_scalar("meta.envs"));
  if (envs_in != static_cast<int>(envs_.size()))
    throw std::runtime_error("checkpoint: env count mismatch");
  auto load_params = [&](const std::string& name, Eigen::VectorXf& dst) {
    Eigen::VectorXf v = ckpt.get_vector(name);
    if (v.size() != dst.size())
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    dst = v;
  };
  load_params("actor.params", ac_.actor.params());
  Eigen::VectorXf ls = ckpt.get_vector("actor.log_std");
  ac_.log_std = ls;
  load_params("critic.params", ac_.critic.params());
  load_params("policy.adam.m", policy_opt_.moment1());
  load_params("policy.adam.v", policy_opt_.moment2());
  policy_opt_.set_step_count(static_cast<long>(ckpt.get_scalar("policy.adam.t")));
  policy_opt_.set_lr(ckpt.get_raw_doubles("policy.lr")[0]);
  load_params("mcp.encoder.params", mcp_.encoder().params());
  load_params("mcp.decoder.params", mcp_.decoder().params());
  load_params("mcp.adam_enc.m", mcp_enc_opt_.moment1());
  load_params("mcp.adam_enc.v", mcp_enc_opt_.moment2());
  mcp_enc_opt_.set_step_count(static_cast<long>(ckpt.get_scalar("mcp.adam_enc.t")));
  load_params("mcp.adam_dec.m", mcp_dec_opt_.moment1());
  load_params("mcp.adam_dec.v", mcp_dec_opt_.moment2());
  mcp_dec_opt_.set_step_count(static_cast<long>(ckpt.get_scalar("mcp.adam_dec.t")));
  norm_o_.set_stats(ckpt.get_vector("norm_o.mean"), ckpt.get_vector("norm_o.var"),
                    static_cast<float>(ckpt.get_scalar("norm_o.count")));
  norm_s_.set_stats(ckpt.get_vector("norm_s.mean"), ckpt.get_vector("norm_s.var"),
                    static_cast<float>(ckpt.get_scalar("norm_s.count")));
  std::vector<uint64_t> tr = ckpt.get_raw_u64("trainer.rng");
  trainer_rng_.set_raw(tr[0], tr[1]);
  std::vector<uint64_t> rr = ckpt.get_raw_u64("root.rng");
  root_rng_.set_raw(rr[0], rr[1]);

  std::vector<double> cur = ckpt.get_raw_doubles("curriculum.levels");
  for (size_t e = 0; e < envs_.size(); ++e) {
    curriculum_[e].level = static_cast<int>(cur[3 * e]);
    curriculum_[e].promotions = static_cast<int>(cur[3 * e + 1]);
    curriculum_[e].demotions = static_cast<int>(cur[3 * e + 2]);
    envs_[e].set_terrain(&terrains_[e % families_.size()][curriculum_[e].level - 1]);
    envs_[e].deserialize(ckpt, "env" + std::to_string(e));
  }

  auto load_mat = [&](const std::string& name, Eigen::MatrixXf& dst) {
    const Checkpoint::Entry& e = ckpt.get(name);
    if (e.shape.size() != 2 || e.shape[0] != dst.rows() || e.shape[1] != dst.cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    std::memcpy(dst.data(), e.data.data(), e.data.size() * sizeof(float));
  };
  load_mat("carried.hist", cur_hist_);
  load_mat("carried.p", cur_p_);
  load_mat("carried.s", cur_s_);
  load_mat("carried.s_raw", cur_s_raw_);
}

void Trainer::train() {
  init();
  namespace fs = std::filesystem;
  fs::create_directories(cfg_.train.out_dir);
  cfg_.save(cfg_.train.out_dir + "/config.json");
  bool resuming = iteration_ > 0;
  metrics_ = std::make_unique<MetricsWriter>(cfg_.train.out_dir + "/metrics.csv",
                                             metrics_columns(), resuming);
  guard_checkpoint_path_ = cfg_.train.out_dir + "/last.ckpt";
  save_checkpoint(guard_checkpoint_path_);

  while (iteration_ < cfg_.train.iterations) {
    IterationStats stats = run_iteration();
    bool finite = std::isfinite(stats.ppo.policy_loss) && std::isfinite(stats.ppo.value_loss) &&
                  std::isfinite(stats.mcp.total()) && std::isfinite(stats.mean_reward);
    if (!finite) {
      lr_halvings_++;
      std::cerr << "[frlab] non-finite loss at iteration " << iteration_
                << "; restoring checkpoint and halving lr (" << lr_halvings_ << "/3)\n";
      if (lr_halvings_ > 3)
        throw std::runtime_error("training diverged after 3 recovery attempts");
      double lr = policy_opt_.lr() * 0.5;
      load_checkpoint(guard_checkpoint_path_);
      policy_opt_.set_lr(lr);
      continue;
    }

    std::map<std::string, double> row;
    row["iteration"] = stats.iteration;
    row["steps"] = static_cast<double>(stats.iteration) * batch_.rows();
    row["mean_reward"] = stats.mean_reward;
    row["success_rate"] = stats.success_rate;
    row["episodes"] = stats.episodes_finished;
    row["mean_level"] = stats.mean_level;
    row["sim_faults"] = stats.sim_faults;
    row["policy_loss"] = stats.ppo.policy_loss;
    row["value_loss"] = stats.ppo.value_loss;
    row["entropy"] = stats.ppo.entropy;
    row["approx_kl"] = stats.ppo.approx_kl;
    row["lr"] = stats.ppo.lr;
    row["ppo_epochs"] = stats.ppo.epochs_run;
    row["mcp_mass_mse"] = stats.mcp.mass_mse;
    row["mcp_contact_bce"] = stats.mcp.contact_bce;
    row["mcp_recon_mse"] = stats.mcp.recon_mse;
    row["mcp_kl"] = stats.mcp.kl;
    row["mcp_total"] = stats.mcp.total();
    for (int i = 0; i < RewardBreakdown::kNumTerms; ++i)
      row[std::string("rew_") + RewardBreakdown::term_name(i)] = stats.term_means[i];
    metrics_->write_row(row);

    save_checkpoint(guard_checkpoint_path_ + ".tmp");
    fs::rename(guard_checkpoint_path_ + ".tmp", guard_checkpoint_path_);
    if (iteration_ % cfg_.train.checkpoint_every == 0) {
      save_checkpoint(cfg_.train.out_dir + "/ckpt_" + std::to_string(iteration_) + ".ckpt");
    }
    if (iteration_ % 10 == 0) {
      std::cout << "iter " << iteration_ << " reward " << stats.mean_reward << " success "
                << stats.success_rate << " kl " << stats.ppo.approx_kl << " lr "
                << stats.ppo.lr << std::endl;
    }
  }
  save_checkpoint(cfg_.train.out_dir + "/final.ckpt");
}

}  // namespace frlab
