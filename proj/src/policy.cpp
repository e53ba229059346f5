#include "frlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace frlab {

Vec12 compose_target(const Vec12& action, const Vec12& q_init, double action_scale,
                     double action_clip, const Vec12& q_lower, const Vec12& q_upper) {
  Vec12 target;
  for (int i = 0; i < 12; ++i) {
    double a = std::clamp(action[i], -action_clip, action_clip);
    target[i] = std::clamp(q_init[i] + action_scale * a, q_lower[i], q_upper[i]);
  }
  return target;
}

void gae(const std::vector<double>& rewards, const std::vector<double>& values,
         const std::vector<uint8_t>& dones, double bootstrap_value, double gamma, double lam,
         std::vector<double>& advantages, std::vector<double>& returns) {
  const int n = static_cast<int>(rewards.size());
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double not_done = dones[t] ? 0.0 : 1.0;
    double next_value = (t == n - 1) ? bootstrap_value : values[t + 1];
    double delta = rewards[t] + gamma * not_done * next_value - values[t];
    next_adv = delta + gamma * lam * not_done * next_adv;
    advantages[t] = next_adv;
    returns[t] = advantages[t] + values[t];
  }
}

void RolloutBatch::resize(int envs, int steps) {
  num_envs = envs;
  horizon = steps;
  const int n = envs * steps;
  policy_obs.setZero(n, kPolicyDim);
  privileged.setZero(n, kPrivilegedDim);
  actions.setZero(n, kActionDim);
  log_probs.setZero(n);
  rewards.setZero(n);
  values.setZero(n);
  dones.setZero(n);
  advantages.setZero(n);
  returns.setZero(n);
  bootstrap.setZero(envs);
  histories.setZero(n, kHistoryLen * kObsDim);
  mass_targets.setZero(n, kMassDim);
  contact_targets.setZero(n, kContactDim);
  next_obs.setZero(n, kObsDim);
  recon_mask.setZero(n);
}

void RolloutBatch::compute_gae(double gamma, double lam) {
  std::vector<double> r(horizon), v(horizon), adv, ret;
  std::vector<uint8_t> d(horizon);
  for (int e = 0; e < num_envs; ++e) {
    for (int t = 0; t < horizon; ++t) {
      int row = t * num_envs + e;
      r[t] = rewards[row];
      v[t] = values[row];
      d[t] = dones[row] > 0.5f ? 1 : 0;
    }
    gae(r, v, d, bootstrap[e], gamma, lam, adv, ret);
    for (int t = 0; t < horizon; ++t) {
      int row = t * num_envs + e;
      advantages[row] = static_cast<float>(adv[t]);
      returns[row] = static_cast<float>(ret[t]);
    }
  }
}

PpoStats ppo_update(RolloutBatch& batch, ActorCritic<float>& ac, Adam<float>& optimizer,
                    const PpoConfig& cfg, Rng& rng) {
  const int n = batch.rows();
  // Batch-level advantage normalization (population statistics).
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) mean += batch.advantages[i];
  mean /= n;
  for (int i = 0; i < n; ++i) {
    double d = batch.advantages[i] - mean;
    sq += d * d;
  }
  double stddev = std::sqrt(sq / n);
  Eigen::VectorXf adv_norm(n);
  for (int i = 0; i < n; ++i)
    adv_norm[i] = static_cast<float>((batch.advantages[i] - mean) / (stddev + 1e-8));

  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  PpoStats stats;
  int updates = 0;
  bool aborted = false;
  const int mb_count = std::max(1, cfg.minibatches);
  for (int epoch = 0; epoch < cfg.epochs && !aborted; ++epoch) {
    // Fisher-Yates with the trainer stream keeps runs reproducible.
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng.uniform_int(static_cast<uint32_t>(i + 1)));
      std::swap(indices[i], indices[j]);
    }
    const int mb_size = n / mb_count;
    for (int mb = 0; mb < mb_count; ++mb) {
      const int start = mb * mb_size;
      const int count = (mb == mb_count - 1) ? n - start : mb_size;
      Eigen::MatrixXf p_obs(count, kPolicyDim), s_priv(count, kPrivilegedDim),
          acts(count, kActionDim);
      Eigen::VectorXf logp_old(count), adv(count), ret(count);
      for (int i = 0; i < count; ++i) {
        int src = indices[start + i];
        p_obs.row(i) = batch.policy_obs.row(src);
        s_priv.row(i) = batch.privileged.row(src);
        acts.row(i) = batch.actions.row(src);
        logp_old[i] = batch.log_probs[src];
        adv[i] = adv_norm[src];
        ret[i] = batch.returns[src];
      }
      Eigen::VectorXf grad;
      PpoLossOut<float> out =
          ppo_loss_grad<float>(ac, p_obs, s_priv, acts, logp_old, adv, ret, cfg, grad);

      if (!std::isfinite(out.approx_kl) || out.approx_kl > cfg.kl_abort) {
        aborted = true;
        break;
      }
      if (cfg.adaptive_lr) {
        double lr = optimizer.lr();
        if (out.approx_kl > 2.0 * cfg.kl_target) {
          lr = std::max(cfg.lr_min, lr / 1.5);
        } else if (out.approx_kl < 0.5 * cfg.kl_target && out.approx_kl > 0.0) {
          lr = std::min(cfg.lr_max, lr * 1.5);
        }
        optimizer.set_lr(lr);
      }
      clip_grad_norm(grad, cfg.max_grad_norm);
      Eigen::VectorXf params = ac.params();
      optimizer.step(params, grad);
      ac.set_params(params);

      stats.policy_loss += out.policy_loss;
      stats.value_loss += out.value_loss;
      stats.entropy += out.entropy;
      stats.approx_kl += out.approx_kl;
      updates++;
    }
    if (!aborted) stats.epochs_run++;
  }
  if (updates > 0) {
    stats.policy_loss /= updates;
    stats.value_loss /= updates;
    stats.entropy /= updates;
    stats.approx_kl /= updates;
  }
  stats.lr = optimizer.lr();
  return stats;
}

}  // namespace frlab
