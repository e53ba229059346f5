#pragma once

#include <string>
#include <vector>

#include "frlab/config.hpp"
#include "frlab/env.hpp"
#include "frlab/mcp.hpp"
#include "frlab/policy.hpp"

namespace frlab {

/// Frozen policy/predictor snapshot for evaluation (mean actions, mean
/// latent, frozen normalizers, no observation noise).
struct EvalPolicy {
  ActorCritic<float> ac;
  McpNet<float> mcp;
  Normalizer norm_o{kObsDim};
  Normalizer norm_s{kPrivilegedDim};

  static EvalPolicy from_checkpoint(const std::string& path, const Config& cfg);
};

struct EvalSummary {
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_time_to_upright = 0.0;  // over successful episodes
  double mean_displacement = 0.0;
};

/// Per-step predictor sample for usefulness analysis and dump plots.
struct McpEvalRow {
  double time = 0.0;
  Eigen::Vector4f m_hat, m_true;
  VecXf c_hat{VecXf::Zero(kContactDim)}, c_true{VecXf::Zero(kContactDim)};
  double mean_abs_qd = 0.0;
};

/// Side-view skeleton sample for trajectory replay rendering.
struct TrajFrame {
  double time = 0.0;
  Eigen::Vector3d base;
  Eigen::Quaterniond quat;
  Vec12 q;
  std::array<Eigen::Vector3d, 4> hips, knees, feet;
  double terrain_h = 0.0;
};

void save_trajectory_csv(const std::string& path, const std::vector<TrajFrame>& frames);
std::vector<TrajFrame> load_trajectory_csv(const std::string& path);
void render_trajectory_svg(const std::string& path, const std::vector<TrajFrame>& frames,
                           int snapshots = 8);

/// Runs episodes with deterministic actions on one terrain. Optional sinks
/// collect per-episode results, predictor samples, and the first episode's
/// trajectory.
EvalSummary run_episodes(const Config& cfg, EvalPolicy& policy, const Heightfield& terrain,
                         int episodes, uint64_t seed,
                         std::vector<EpisodeResult>* results = nullptr,
                         std::vector<McpEvalRow>* mcp_rows = nullptr,
                         std::vector<TrajFrame>* first_traj = nullptr);

struct SuccessMatrix {
  std::vector<std::string> families;
  std::vector<int> levels;
  // mean/std success rate over seeds; indexed [family][level_index]
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> stddev;

  void save_csv(const std::string& path) const;
  static SuccessMatrix load_csv(const std::string& path);
};

/// Mean and std success rate per (family, level) over several evaluation
/// seeds.
SuccessMatrix success_matrix(const Config& cfg, EvalPolicy& policy,
                             const std::vector<TerrainFamily>& families,
                             const std::vector<int>& levels, int episodes_per_cell, int n_seeds,
                             uint64_t base_seed);

void save_success_plot(const SuccessMatrix& m, const std::string& path);

/// Spearman rank correlation between level and success rate for one family
/// row; the trend check expects values <= 0 for trained policies.
double spearman_level_trend(const std::vector<double>& success_by_level);

}  // namespace frlab
