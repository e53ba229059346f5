#include "frlab/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "frlab/checkpoint.hpp"
#include "frlab/svgplot.hpp"

namespace frlab {

EvalPolicy EvalPolicy::from_checkpoint(const std::string& path, const Config& cfg) {
  Checkpoint ckpt = Checkpoint::load(path);
  EvalPolicy p;
  p.ac = ActorCritic<float>(cfg.policy);
  p.mcp = McpNet<float>(cfg.mcp, cfg.train.no_mass, cfg.train.no_col, cfg.train.no_est);
  auto fetch = [&](const std::string& name, Eigen::VectorXf& dst) {
    Eigen::VectorXf v = ckpt.get_vector(name);
    if (v.size() != dst.size())
      throw std::runtime_error("checkpoint: shape mismatch for " + name +
                               " (config does not match checkpoint)");
    dst = v;
  };
  fetch("actor.params", p.ac.actor.params());
  p.ac.log_std = ckpt.get_vector("actor.log_std");
  fetch("critic.params", p.ac.critic.params());
  fetch("mcp.encoder.params", p.mcp.encoder().params());
  fetch("mcp.decoder.params", p.mcp.decoder().params());
  p.norm_o.set_stats(ckpt.get_vector("norm_o.mean"), ckpt.get_vector("norm_o.var"),
                     static_cast<float>(ckpt.get_scalar("norm_o.count")));
  p.norm_s.set_stats(ckpt.get_vector("norm_s.mean"), ckpt.get_vector("norm_s.var"),
                     static_cast<float>(ckpt.get_scalar("norm_s.count")));
  p.norm_o.set_frozen(true);
  p.norm_s.set_frozen(true);
  return p;
}

EvalSummary run_episodes(const Config& cfg, EvalPolicy& policy, const Heightfield& terrain,
                         int episodes, uint64_t seed, std::vector<EpisodeResult>* results,
                         std::vector<McpEvalRow>* mcp_rows,
                         std::vector<TrajFrame>* first_traj) {
  EvalSummary summary;
  Rng root(seed);
  Env env(&cfg, 1, root);
  env.set_terrain(&terrain);

  double t2u_sum = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.start_episode();
    env.observe(policy.norm_o, /*with_noise=*/false);
    bool record = first_traj != nullptr && ep == 0;
    for (;;) {
      Eigen::MatrixXf hist(1, kHistoryLen * kObsDim);
      hist.row(0) = env.history_flat().transpose();
      auto heads = policy.mcp.encode(hist, nullptr);
      Eigen::Vector4f m_hat = heads.m_hat.row(0).transpose();
      VecXf c_hat = heads.c_hat.row(0).transpose();
      VecXf z_hat = heads.z.row(0).transpose();
      VecXf p = build_p(env.current_obs(), m_hat, c_hat, z_hat);
      Eigen::MatrixXf pm(1, kPolicyDim);
      pm.row(0) = p.transpose();
      Eigen::MatrixXf mean = policy.ac.actor.forward(pm);

      if (mcp_rows != nullptr) {
        McpEvalRow row;
        row.time = env.state().time;
        row.m_hat = m_hat;
        row.m_true = env.mass_target();
        row.c_hat = c_hat;
        row.c_true = env.contact_target();
        row.mean_abs_qd = env.state().qd.cwiseAbs().mean();
        mcp_rows->push_back(row);
      }
      if (record) {
        TrajFrame f;
        f.time = env.state().time;
        f.base = env.state().base_pos;
        f.quat = env.state().base_quat;
        f.q = env.state().q;
        env.sim().skeleton_points(f.base, f.hips, f.knees, f.feet);
        f.terrain_h = terrain.height_at(f.base.x(), f.base.y());
        first_traj->push_back(f);
      }

      Env::StepInfo info = env.apply_action(mean.row(0).transpose());
      if (info.episode_ended) {
        summary.episodes++;
        if (info.result.success) {
          summary.successes++;
          t2u_sum += info.result.time_to_upright;
        }
        summary.mean_displacement += info.result.displacement;
        if (results != nullptr) results->push_back(info.result);
        break;
      }
      env.observe(policy.norm_o, false);
    }
  }
  summary.success_rate =
      summary.episodes > 0 ? static_cast<double>(summary.successes) / summary.episodes : 0.0;
  summary.mean_time_to_upright = summary.successes > 0 ? t2u_sum / summary.successes : -1.0;
  summary.mean_displacement =
      summary.episodes > 0 ? summary.mean_displacement / summary.episodes : 0.0;
  return summary;
}

void SuccessMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "family,level,mean,std\n";
  for (size_t f = 0; f < families.size(); ++f)
    for (size_t l = 0; l < levels.size(); ++l)
      out << families[f] << "," << levels[l] << "," << mean[f][l] << "," << stddev[f][l] << "\n";
}

SuccessMatrix SuccessMatrix::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SuccessMatrix m;
  std::string line;
  std::getline(in, line);  // header
  struct Row {
    std::string family;
    int level;
    double mean, stddev;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row r;
    std::string cell;
    std::getline(ls, r.family, ',');
    std::getline(ls, cell, ',');
    r.level = std::stoi(cell);
    std::getline(ls, cell, ',');
    r.mean = std::stod(cell);
    std::getline(ls, cell, ',');
    r.stddev = std::stod(cell);
    rows.push_back(r);
  }
  for (const Row& r : rows) {
    if (std::find(m.families.begin(), m.families.end(), r.family) == m.families.end())
      m.families.push_back(r.family);
    if (std::find(m.levels.begin(), m.levels.end(), r.level) == m.levels.end())
      m.levels.push_back(r.level);
  }
  m.mean.assign(m.families.size(), std::vector<double>(m.levels.size(), 0.0));
  m.stddev = m.mean;
  for (const Row& r : rows) {
    size_t f = std::find(m.families.begin(), m.families.end(), r.family) - m.families.begin();
    size_t l = std::find(m.levels.begin(), m.levels.end(), r.level) - m.levels.begin();
    m.mean[f][l] = r.mean;
    m.stddev[f][l] = r.stddev;
  }
  return m;
}

SuccessMatrix success_matrix(const Config& cfg, EvalPolicy& policy,
                             const std::vector<TerrainFamily>& families,
                             const std::vector<int>& levels, int episodes_per_cell, int n_seeds,
                             uint64_t base_seed) {
  SuccessMatrix m;
  for (TerrainFamily f : families) m.families.push_back(to_string(f));
  m.levels = levels;
  m.mean.assign(families.size(), std::vector<double>(levels.size(), 0.0));
  m.stddev = m.mean;
  for (size_t fi = 0; fi < families.size(); ++fi) {
    for (size_t li = 0; li < levels.size(); ++li) {
      Heightfield terrain = generate_terrain(families[fi], levels[li],
                                             cfg.train.seed * 977 + levels[li], cfg.terrain);
      std::vector<double> rates;
      for (int s = 0; s < n_seeds; ++s) {
        EvalSummary sum = run_episodes(cfg, policy, terrain, episodes_per_cell,
                                       base_seed + 1000003ULL * s + 17ULL * fi + li);
        rates.push_back(sum.success_rate);
      }
      double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
      double var = 0.0;
      for (double r : rates) var += (r - mean) * (r - mean);
      var /= rates.size();
      m.mean[fi][li] = mean;
      m.stddev[fi][li] = std::sqrt(var);
    }
  }
  return m;
}

void save_success_plot(const SuccessMatrix& m, const std::string& path) {
  SvgLineChart chart("Recovery success rate by terrain level", "level", "success rate");
  chart.set_y_range(0.0, 1.0);
  std::vector<double> xs(m.levels.begin(), m.levels.end());
  for (size_t f = 0; f < m.families.size(); ++f) {
    chart.add_series(m.families[f], xs, m.mean[f]);
    chart.add_band(f, m.stddev[f]);
  }
  chart.save(path);
}

double spearman_level_trend(const std::vector<double>& success_by_level) {
  const size_t n = success_by_level.size();
  if (n < 2) return 0.0;
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < order.size()) {
      size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      double avg = (i + j) / 2.0 + 1.0;  // average rank for ties
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> levels(n);
  std::iota(levels.begin(), levels.end(), 1.0);
  std::vector<double> rx = ranks(levels);
  std::vector<double> ry = ranks(success_by_level);
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

void save_trajectory_csv(const std::string& path, const std::vector<TrajFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "time,base_x,base_y,base_z,quat_w,quat_x,quat_y,quat_z";
  for (int j = 0; j < 12; ++j) out << ",q" << j;
  const char* legs[4] = {"fl", "fr", "rl", "rr"};
  for (const char* part : {"hip", "knee", "foot"})
    for (int l = 0; l < 4; ++l)
      out << "," << part << "_" << legs[l] << "_x"
          << "," << part << "_" << legs[l] << "_y"
          << "," << part << "_" << legs[l] << "_z";
  out << ",terrain_h\n";
  for (const TrajFrame& f : frames) {
    out << f.time << "," << f.base.x() << "," << f.base.y() << "," << f.base.z() << ","
        << f.quat.w() << "," << f.quat.x() << "," << f.quat.y() << "," << f.quat.z();
    for (int j = 0; j < 12; ++j) out << "," << f.q[j];
    for (const auto* arr : {&f.hips, &f.knees, &f.feet})
      for (int l = 0; l < 4; ++l)
        out << "," << (*arr)[l].x() << "," << (*arr)[l].y() << "," << (*arr)[l].z();
    out << "," << f.terrain_h << "\n";
  }
}

std::vector<TrajFrame> load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<TrajFrame> frames;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> v;
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() < 57) continue;
    TrajFrame f;
    size_t at = 0;
    f.time = v[at++];
    f.base = Eigen::Vector3d(v[at], v[at + 1], v[at + 2]);
    at += 3;
    f.quat = Eigen::Quaterniond(v[at], v[at + 1], v[at + 2], v[at + 3]);
    at += 4;
    for (int j = 0; j < 12; ++j) f.q[j] = v[at++];
    for (auto* arr : {&f.hips, &f.knees, &f.feet})
      for (int l = 0; l < 4; ++l) {
        (*arr)[l] = Eigen::Vector3d(v[at], v[at + 1], v[at + 2]);
        at += 3;
      }
    f.terrain_h = v[at++];
    frames.push_back(f);
  }
  return frames;
}

void render_trajectory_svg(const std::string& path, const std::vector<TrajFrame>& frames,
                           int snapshots) {
  if (frames.empty()) throw std::runtime_error("trajectory is empty");
  const int panel_w = 160, panel_h = 170;
  SvgCanvas canvas(panel_w * snapshots, panel_h + 30);
  canvas.text(8, 16, "side view (x-z), time left to right", 11);
  for (int s = 0; s < snapshots; ++s) {
    size_t idx = frames.size() <= 1
                     ? 0
                     : static_cast<size_t>(std::round(
                           static_cast<double>(s) * (frames.size() - 1) / (snapshots - 1)));
    const TrajFrame& f = frames[idx];
    double x0 = panel_w * s;
    // world-to-panel: 1.2 m wide window centered on the base
    auto px = [&](double wx) { return x0 + 15 + (wx - f.base.x() + 0.6) / 1.2 * (panel_w - 30); };
    auto pz = [&](double wz) {
      return 30 + (panel_h - 40) - (wz - f.terrain_h + 0.2) / 1.2 * (panel_h - 40);
    };
    canvas.rect(x0 + 2, 28, panel_w - 4, panel_h - 8, "none", "#ccc");
    canvas.line(px(f.base.x() - 0.6), pz(f.terrain_h), px(f.base.x() + 0.6), pz(f.terrain_h),
                "#8a6", 2.0);
    std::ostringstream ts;
    ts.precision(3);
    ts << "t=" << f.time << "s";
    canvas.text(x0 + 8, 44, ts.str(), 10);
    canvas.circle(px(f.base.x()), pz(f.base.z()), 4, "#333");
    for (int l = 0; l < 4; ++l) {
      const std::string color = plot_color(l);
      canvas.line(px(f.base.x()), pz(f.base.z()), px(f.hips[l].x()), pz(f.hips[l].z()), "#999",
                  1.0);
      canvas.line(px(f.hips[l].x()), pz(f.hips[l].z()), px(f.knees[l].x()), pz(f.knees[l].z()),
                  color, 2.0);
      canvas.line(px(f.knees[l].x()), pz(f.knees[l].z()), px(f.feet[l].x()), pz(f.feet[l].z()),
                  color, 2.0);
      canvas.circle(px(f.feet[l].x()), pz(f.feet[l].z()), 2, color);
    }
  }
  canvas.save(path);
}

}  // namespace frlab
