#pragma once

#include <Eigen/Core>
#include <vector>

#include "frlab/config.hpp"
#include "frlab/morphology.hpp"
#include "frlab/nn.hpp"
#include "frlab/observation.hpp"

namespace frlab {

inline constexpr int kActionDim = 12;
inline constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

/// Diagonal-Gaussian actor and privileged critic. The actor only ever sees
/// the 75-entry policy input; the critic only the 277-entry privileged
/// state.
template <typename S>
struct ActorCritic {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Mlp<S> actor;    // kPolicyDim -> ... -> kActionDim (mean)
  Vec log_std;     // kActionDim
  Mlp<S> critic;   // kPrivilegedDim -> ... -> 1

  ActorCritic() = default;
  explicit ActorCritic(const PolicyConfig& cfg) {
    std::vector<int> adims{kPolicyDim};
    for (int h : cfg.actor_hidden) adims.push_back(h);
    adims.push_back(kActionDim);
    actor = Mlp<S>(adims);
    std::vector<int> cdims{kPrivilegedDim};
    for (int h : cfg.critic_hidden) cdims.push_back(h);
    cdims.push_back(1);
    critic = Mlp<S>(cdims);
    log_std = Vec::Constant(kActionDim, static_cast<S>(cfg.init_log_std));
  }

  void init(Rng& rng) {
    actor.init(rng, 0.01);
    critic.init(rng);
  }

  int num_params() const {
    return static_cast<int>(actor.params().size() + log_std.size() + critic.params().size());
  }
  Vec params() const {
    Vec p(num_params());
    p << actor.params(), log_std, critic.params();
    return p;
  }
  void set_params(const Vec& p) {
    int na = static_cast<int>(actor.params().size());
    actor.params() = p.segment(0, na);
    log_std = p.segment(na, kActionDim);
    critic.params() = p.segment(na + kActionDim, critic.params().size());
  }

  /// Per-sample log density of actions under the diagonal Gaussian.
  Vec log_prob(const Mat& mean, const Mat& actions) const {
    const int n = static_cast<int>(mean.rows());
    Vec out(n);
    for (int i = 0; i < n; ++i) {
      S lp = 0;
      for (int j = 0; j < kActionDim; ++j) {
        S sigma = std::exp(log_std[j]);
        S z = (actions(i, j) - mean(i, j)) / sigma;
        lp += -S(0.5) * z * z - log_std[j] - S(kHalfLog2Pi);
      }
      out[i] = lp;
    }
    return out;
  }

  /// Entropy of the action distribution (state independent).
  S entropy() const {
    S e = 0;
    for (int j = 0; j < kActionDim; ++j) e += log_std[j] + S(0.5) + S(kHalfLog2Pi);
    return e;
  }
};

/// Desired joint target from a policy action: scaled, clamped pre-scale,
/// offset from the initial pose and clamped to the joint limits.
Vec12 compose_target(const Vec12& action, const Vec12& q_init, double action_scale,
                     double action_clip, const Vec12& q_lower, const Vec12& q_upper);

/// Generalized advantage estimation. `dones[t]` marks that the episode
/// ended at step t; the bootstrap value closes the final partial episode.
void gae(const std::vector<double>& rewards, const std::vector<double>& values,
         const std::vector<uint8_t>& dones, double bootstrap_value, double gamma, double lam,
         std::vector<double>& advantages, std::vector<double>& returns);

/// Time-major rollout storage: row index = step * num_envs + env.
struct RolloutBatch {
  int num_envs = 0;
  int horizon = 0;
  Eigen::MatrixXf policy_obs;    // N x 75
  Eigen::MatrixXf privileged;    // N x 277
  Eigen::MatrixXf actions;       // N x 12
  Eigen::VectorXf log_probs;     // N
  Eigen::VectorXf rewards;       // N
  Eigen::VectorXf values;        // N
  Eigen::VectorXf dones;         // N, 1.0 at episode end
  Eigen::VectorXf advantages;    // N
  Eigen::VectorXf returns;       // N
  Eigen::VectorXf bootstrap;     // num_envs, V(s) after the last step
  // Predictor training data, aligned with rows.
  Eigen::MatrixXf histories;     // N x 210
  Eigen::MatrixXf mass_targets;  // N x 4
  Eigen::MatrixXf contact_targets;  // N x 13
  Eigen::MatrixXf next_obs;      // N x 42 (normalized)
  Eigen::VectorXf recon_mask;    // N, 0 at terminal transitions

  int rows() const { return num_envs * horizon; }
  void resize(int envs, int steps);
  /// Fills advantages/returns from rewards, values and dones.
  void compute_gae(double gamma, double lam);
};

struct PpoStats {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double approx_kl = 0;
  double lr = 0;
  int epochs_run = 0;
};

/// PPO loss and gradient for one minibatch. Advantages must already be
/// normalized. The gradient layout matches ActorCritic<S>::params().
template <typename S>
struct PpoLossOut {
  S policy_loss = 0, value_loss = 0, entropy = 0, approx_kl = 0, total = 0;
};

template <typename S>
PpoLossOut<S> ppo_loss_grad(const ActorCritic<S>& ac,
                            const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& p_obs,
                            const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& s_priv,
                            const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& actions,
                            const Eigen::Matrix<S, Eigen::Dynamic, 1>& logp_old,
                            const Eigen::Matrix<S, Eigen::Dynamic, 1>& adv,
                            const Eigen::Matrix<S, Eigen::Dynamic, 1>& ret,
                            const PpoConfig& cfg, Eigen::Matrix<S, Eigen::Dynamic, 1>& grad) {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(p_obs.rows());
  typename Mlp<S>::Cache actor_cache, critic_cache;
  Mat mean = ac.actor.forward(p_obs, &actor_cache);
  Mat value = ac.critic.forward(s_priv, &critic_cache);

  Vec logp = ac.log_prob(mean, actions);
  PpoLossOut<S> out;

  Mat d_mean = Mat::Zero(n, kActionDim);
  Vec d_log_std = Vec::Zero(kActionDim);
  Mat d_value = Mat::Zero(n, 1);

  S pg_sum = 0, kl_sum = 0, v_sum = 0;
  for (int i = 0; i < n; ++i) {
    S ratio = std::exp(logp[i] - logp_old[i]);
    S clipped = std::min(std::max(ratio, S(1) - S(cfg.clip_ratio)), S(1) + S(cfg.clip_ratio));
    S pg1 = -adv[i] * ratio;
    S pg2 = -adv[i] * clipped;
    S pg = std::max(pg1, pg2);
    pg_sum += pg;
    kl_sum += (ratio - S(1)) - std::log(ratio);
    // gradient flows only while the unclipped branch is the max; inside the
    // clip band the two branches coincide
    S dpg_dlogp = pg1 >= pg2 ? -adv[i] * ratio : S(0);
    S dlogp_scale = dpg_dlogp / S(n);
    for (int j = 0; j < kActionDim; ++j) {
      S sigma = std::exp(ac.log_std[j]);
      S z = (actions(i, j) - mean(i, j)) / sigma;
      d_mean(i, j) += dlogp_scale * (z / sigma);
      d_log_std[j] += dlogp_scale * (z * z - S(1));
    }
    S verr = value(i, 0) - ret[i];
    v_sum += verr * verr;
    d_value(i, 0) = S(cfg.value_coef) * S(2) * verr / S(n);
  }
  out.policy_loss = pg_sum / S(n);
  out.approx_kl = kl_sum / S(n);
  out.value_loss = v_sum / S(n);
  out.entropy = ac.entropy();
  out.total = out.policy_loss + S(cfg.value_coef) * out.value_loss -
              S(cfg.entropy_coef) * out.entropy;

  // entropy bonus: d(-c_e * entropy)/d log_std_j = -c_e
  for (int j = 0; j < kActionDim; ++j) d_log_std[j] -= S(cfg.entropy_coef);

  Vec grad_actor = Vec::Zero(ac.actor.params().size());
  Vec grad_critic = Vec::Zero(ac.critic.params().size());
  ac.actor.backward(actor_cache, d_mean, grad_actor);
  ac.critic.backward(critic_cache, d_value, grad_critic);
  grad.resize(ac.num_params());
  grad << grad_actor, d_log_std, grad_critic;
  return out;
}

/// Runs clipped-surrogate PPO epochs with minibatch shuffling, adaptive
/// learning rate toward the KL target and a divergence guard that aborts
/// remaining epochs.
PpoStats ppo_update(RolloutBatch& batch, ActorCritic<float>& ac, Adam<float>& optimizer,
                    const PpoConfig& cfg, Rng& rng);

}  // namespace frlab
