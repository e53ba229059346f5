#pragma once

#include <memory>
#include <string>
#include <vector>

#include "frlab/config.hpp"
#include "frlab/env.hpp"
#include "frlab/mcp.hpp"
#include "frlab/metrics.hpp"
#include "frlab/policy.hpp"

namespace frlab {

struct IterationStats {
  int iteration = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;  // over episodes finished this iteration
  int episodes_finished = 0;
  int sim_faults = 0;
  double mean_level = 0.0;
  std::array<double, RewardBreakdown::kNumTerms> term_means{};
  PpoStats ppo;
  McpLossTerms<float> mcp;
  bool mcp_valid = false;
};

/// Orchestrates rollouts, curriculum, joint PPO + predictor optimization,
/// normalizer maintenance, metrics and checkpoints.
class Trainer {
 public:
  explicit Trainer(const Config& cfg);

  /// Full training loop with periodic checkpoints, metrics and the
  /// non-finite-loss recovery guard.
  void train();

  void init();  // builds envs, terrains, networks; idempotent
  IterationStats run_iteration();

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

  const Config& config() const { return cfg_; }
  ActorCritic<float>& actor_critic() { return ac_; }
  McpNet<float>& mcp() { return mcp_; }
  Normalizer& norm_o() { return norm_o_; }
  Normalizer& norm_s() { return norm_s_; }
  std::vector<Env>& envs() { return envs_; }
  const RolloutBatch& last_batch() const { return batch_; }
  int iteration() const { return iteration_; }
  const Heightfield& terrain(int family_idx, int level) const {
    return terrains_[family_idx][level - 1];
  }

 private:
  void rollout(IterationStats& stats);
  void update_normalizers();
  McpLossTerms<float> mcp_update();
  void build_current_inputs();  // p/s rows + heads for the carried observations

  Config cfg_;
  Rng root_rng_;
  Rng trainer_rng_;

  std::vector<std::vector<Heightfield>> terrains_;  // [family][level-1]
  std::vector<TerrainFamily> families_;
  std::vector<Env> envs_;
  std::vector<CurriculumState> curriculum_;

  ActorCritic<float> ac_;
  Adam<float> policy_opt_;
  McpNet<float> mcp_;
  Adam<float> mcp_enc_opt_;
  Adam<float> mcp_dec_opt_;
  Normalizer norm_o_{kObsDim};
  Normalizer norm_s_{kPrivilegedDim};

  RolloutBatch batch_;
  Eigen::MatrixXf raw_o_rows_;  // rollout raw observations for stats updates
  Eigen::MatrixXf raw_s_rows_;

  // Carried per-env step inputs (valid between iterations).
  Eigen::MatrixXf cur_hist_;   // E x 210
  Eigen::MatrixXf cur_p_;      // E x 75
  Eigen::MatrixXf cur_s_;      // E x 277 (normalized)
  Eigen::MatrixXf cur_s_raw_;  // E x 277

  std::unique_ptr<class ThreadPool> pool_;

  int iteration_ = 0;
  int lr_halvings_ = 0;
  bool initialized_ = false;
  std::unique_ptr<MetricsWriter> metrics_;
  std::string guard_checkpoint_path_;
};

}  // namespace frlab
