#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "frlab/rng.hpp"

namespace frlab {

/// Closed interval used for randomization ranges and level schedules.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
  /// Affine interpolation with t in [0,1]; used by level schedules (t=0 is
  /// level 1, t=1 is level 10). lo/hi need not be ordered.
  double at(double t) const { return lo + (hi - lo) * t; }
};

/// Morphology and control randomization ranges. Defaults are the published
/// randomization table verbatim; joint limits and torque limit are fixed
/// Go2-like values shared by all sampled morphologies.
struct MorphologyConfig {
  Range trunk_mass{4.00, 28.00};
  Range trunk_length{0.37, 0.65};
  Range trunk_width{0.09, 0.30};
  Range trunk_height{0.11, 0.19};
  Range hip_mass{0.30, 0.69};
  Range hip_length{0.03, 0.05};
  Range thigh_mass{0.60, 4.00};
  Range thigh_length{0.21, 0.35};
  Range thigh_width{0.02, 0.04};
  Range thigh_height{0.03, 0.05};
  Range calf_mass{0.10, 0.86};
  Range calf_length{0.21, 0.35};
  Range calf_width{0.016, 0.020};
  Range calf_height{0.013, 0.019};

  Range kp{20.0, 80.0};
  Range kd{0.6, 2.0};
  Range motor_strength{0.9, 1.1};
  Range com_shift{-0.05, 0.05};
  Range payload{-2.0, 2.0};
  Range motor_friction{0.2, 1.25};    // viscous joint damping, N·m·s/rad
  Range ground_friction{0.25, 1.25};  // Coulomb coefficient vs terrain

  double torque_limit = 23.7;
  // Per-leg joint triples (hip roll, thigh pitch, calf pitch).
  std::array<double, 3> joint_lower{-1.0472, -1.5708, -2.7227};
  std::array<double, 3> joint_upper{1.0472, 3.4907, -0.8378};
  double foot_radius = 0.022;
};

struct SimConfig {
  double control_dt = 0.02;  // 50 Hz control clock
  int substeps = 4;          // physics substeps per control step
  double gravity = 9.81;
  double contact_stiffness = 5.0e4;  // N/m
  double contact_damping = 500.0;    // N·s/m
  double max_penetration = 0.003;    // rigid backstop depth, m
  int contact_iterations = 2;
  double joint_armature = 0.02;  // reflected rotor inertia, kg·m²
  double limit_stiffness = 40.0;  // soft joint-limit spring, N·m/rad
  double limit_damping = 1.0;
  double settle_time = 0.4;  // reset burn-in, s

  double dt_physics() const { return control_dt / substeps; }
};

struct TerrainConfig {
  double cell_size = 0.05;
  double extent = 8.0;  // square field edge, m
  // Level schedules, value at level 1 -> value at level 10.
  Range rough_amplitude{0.025, 0.20};
  Range slope_angle_deg{5.0, 40.0};
  Range stair_height{0.05, 0.20};
  double stair_tread = 0.30;
  Range stone_height{0.05, 0.25};
  Range stone_density{0.25, 0.70};
  Range gap_width{0.05, 0.40};
  Range beam_width{0.35, 0.15};
  double beam_drop = 0.3;
  double beam_gap = 0.12;
};

struct ObservationConfig {
  bool noise = true;
  double noise_ang_vel = 0.2;
  double noise_gravity = 0.05;
  double noise_q = 0.01;
  double noise_qd = 1.5;
  int scan_rows = 17;
  int scan_cols = 11;
  double scan_spacing = 0.1;
  double scan_clip = 1.0;
};

/// Reward weights and shaping constants. Defaults follow the recovery
/// reward table exactly.
struct RewardConfig {
  double w_orientation = -0.5;
  double w_upright = 6.0;
  double w_posture = 4.0;
  double w_feet_contact = 0.3;
  double w_body_contact = -0.2;
  double w_knee_force = -1.0e-2;
  double w_body_bias = -0.1;
  double w_position_limits = -1.0;
  double w_ang_vel_limit = -0.1;
  double w_joint_acc = -2.5e-6;
  double w_joint_vel = -1.0e-2;
  double w_action_smooth = -0.01;
  double w_torque = -5.0e-4;
  double eps_gauss = 0.25;  // width of the upright Gaussian
  double eps_ind = 0.1;     // upright indicator threshold
  double ang_vel_soft_limit = 0.8;
  double body_bias_clip = 4.0;
  bool scale_by_dt = false;
};

struct McpConfig {
  std::vector<int> encoder_hidden{256, 128};
  std::vector<int> decoder_hidden{128, 256};
  int latent_dim = 16;
  double lambda_mass = 1.0;
  double lambda_contact = 1.0;
  double lambda_recon = 1.0;
  double lambda_kl = 0.1;
  double lr = 1.0e-3;
};

struct PolicyConfig {
  std::vector<int> actor_hidden{512, 256, 128};
  std::vector<int> critic_hidden{512, 256, 128};
  double init_log_std = 0.0;
  double action_scale = 0.5;
  double action_clip = 4.0;
  // Nominal standing pose triple (hip, thigh, calf); also the action origin.
  std::array<double, 3> q_stand{0.0, 0.8, -1.5};
};

struct PpoConfig {
  double gamma = 0.99;
  double lam = 0.95;
  double clip_ratio = 0.2;
  int epochs = 5;
  int minibatches = 4;
  double lr = 3.0e-4;
  bool adaptive_lr = true;
  double kl_target = 0.01;
  double kl_abort = 0.08;  // divergence guard: abort epoch above this
  double entropy_coef = 0.005;
  double value_coef = 1.0;
  double max_grad_norm = 1.0;
  double lr_min = 1.0e-5;
  double lr_max = 1.0e-2;
};

struct TrainConfig {
  int envs = 256;
  int horizon = 24;  // rollout steps per iteration, episodes carry over
  int episode_length = 350;
  uint64_t seed = 1;
  int iterations = 1500;
  int checkpoint_every = 100;
  int workers = 1;
  std::vector<std::string> terrain_families{"Rough", "Slope",      "Stairs",
                                            "DiscreteStones", "Gaps", "Beams"};
  bool curriculum = true;
  int start_level = 1;
  bool no_mass = false;
  bool no_col = false;
  bool no_est = false;
  bool bootstrap_timeouts = true;
  std::string out_dir = "runs/default";
};

struct EvalConfig {
  int episodes = 256;
  int seeds = 4;
  double upright_gz_tol = 0.1;
  double hold_time = 0.5;
  double time_limit = 5.0;
  double height_fraction = 0.6;
  double posture_tol = 0.5;
  double displacement_limit = 1.0;
};

/// Top-level run configuration. Serializes to/from a strict JSON file:
/// unknown keys are errors, missing keys keep defaults.
struct Config {
  MorphologyConfig morphology;
  SimConfig sim;
  TerrainConfig terrain;
  ObservationConfig observation;
  RewardConfig rewards;
  McpConfig mcp;
  PolicyConfig policy;
  PpoConfig ppo;
  TrainConfig train;
  EvalConfig eval;

  static Config load(const std::string& path);
  static Config from_json_text(const std::string& text);
  std::string to_json_text() const;
  void save(const std::string& path) const;
};

}  // namespace frlab
