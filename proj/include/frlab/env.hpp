#pragma once

#include <memory>
#include <string>

#include "frlab/checkpoint.hpp"
#include "frlab/config.hpp"
#include "frlab/observation.hpp"
#include "frlab/rewards.hpp"
#include "frlab/sim.hpp"
#include "frlab/terrain.hpp"

namespace frlab {

struct EpisodeResult {
  bool success = false;
  double time_to_upright = -1.0;  // s, negative when never upright
  double displacement = 0.0;      // final horizontal displacement, m
  std::string terminal_reason;    // "timeout" or "fault"
  std::array<double, RewardBreakdown::kNumTerms> reward_sums{};
  double total_reward = 0.0;
  int steps = 0;
};

/// One training/evaluation environment: a freshly randomized robot per
/// episode on a shared immutable heightfield, with observation assembly,
/// reward evaluation and the success criterion tracked online.
class Env {
 public:
  Env(const Config* cfg, uint64_t seed_key, Rng& root_rng);

  void set_terrain(const Heightfield* terrain) { terrain_ = terrain; }
  const Heightfield* terrain() const { return terrain_; }

  /// Samples a new morphology and control randomization, rebuilds the
  /// simulator and performs the supine reset.
  void start_episode();

  /// Builds the current proprioceptive observation (noise applied when
  /// enabled), normalizes it and pushes it into the history window.
  const VecXf& observe(const Normalizer& norm_o, bool with_noise);
  const VecXf& current_obs() const { return o_n_; }
  const VecXf& last_raw_obs() const { return o_raw_; }
  VecXf history_flat() const { return history_.flat(); }

  /// Raw privileged state assembled around the given normalized
  /// proprioceptive observation (normalization of the full vector happens
  /// at the critic input).
  VecXf build_privileged(const VecXf& o_n) const;
  const Vec12& prev_action() const { return prev_action_; }

  /// Normalized ground-truth mass vector for estimator supervision.
  Eigen::Vector4f mass_target() const;
  /// Current per-component contact flags as floats.
  VecXf contact_target() const;

  struct StepInfo {
    float reward = 0.0f;
    RewardBreakdown breakdown;
    bool done = false;
    bool fault = false;
    bool episode_ended = false;
    EpisodeResult result;  // valid when episode_ended
  };

  /// Applies a policy action (pre-scale), advances one control step and
  /// evaluates rewards and the success criterion. Does not auto-reset.
  StepInfo apply_action(const Eigen::VectorXf& action);

  const SimState& state() const { return sim_->state(); }
  const QuadrupedSim& sim() const { return *sim_; }
  const MorphologySpec& morphology() const { return spec_; }
  const ControlRandomization& control() const { return ctrl_; }
  const Vec12& q_stand() const { return q_stand_; }
  Rng& rng() { return rng_; }
  int episode_step() const { return episode_step_; }
  double displacement() const;

  /// Success bookkeeping snapshot (used by evaluation traces).
  bool currently_stable() const { return stable_run_ > 0; }

  /// Full mid-episode state capture for exact training resume.
  void serialize(Checkpoint& ckpt, const std::string& prefix) const;
  void deserialize(const Checkpoint& ckpt, const std::string& prefix);

 private:
  bool stable_pose() const;
  Vec12 compose_targets(const Vec12& a) const;

  const Config* cfg_;
  Rng rng_;
  const Heightfield* terrain_ = nullptr;
  MorphologySpec spec_;
  ControlRandomization ctrl_;
  Vec12 q_stand_ = Vec12::Zero();
  std::unique_ptr<QuadrupedSim> sim_;

  ObsHistory history_;
  VecXf o_n_ = VecXf::Zero(kObsDim);
  VecXf o_raw_ = VecXf::Zero(kObsDim);
  Vec12 prev_action_ = Vec12::Zero();
  Vec12 prev_qd_ = Vec12::Zero();
  ContactReport last_report_;
  Eigen::Vector2d p_init_xy_ = Eigen::Vector2d::Zero();
  int episode_step_ = 0;

  // success criterion state
  int stable_run_ = 0;            // consecutive stable control steps
  double stable_start_time_ = 0;  // episode time when the current run began
  double stable_start_disp_ = 0;
  bool success_ = false;
  double time_to_upright_ = -1.0;

  EpisodeResult accum_;
};

}  // namespace frlab
