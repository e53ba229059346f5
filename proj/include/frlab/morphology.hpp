#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>

#include "frlab/config.hpp"
#include "frlab/rng.hpp"

namespace frlab {

using Vec4 = Eigen::Vector4d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

/// One sampled robot morphology. All four legs share the hip/thigh/calf
/// geometry; link masses are per single link.
struct MorphologySpec {
  double trunk_mass = 0.0;
  double trunk_length = 0.0, trunk_width = 0.0, trunk_height = 0.0;
  double hip_mass = 0.0;
  double hip_length = 0.0;
  double thigh_mass = 0.0;
  double thigh_length = 0.0, thigh_width = 0.0, thigh_height = 0.0;
  double calf_mass = 0.0;
  double calf_length = 0.0, calf_width = 0.0, calf_height = 0.0;
  Vec12 joint_limits_lower = Vec12::Zero();
  Vec12 joint_limits_upper = Vec12::Zero();
  double torque_limit = 0.0;
  double foot_radius = 0.0;
};

/// Per-environment control and physics randomization.
struct ControlRandomization {
  Vec12 kp = Vec12::Zero();
  Vec12 kd = Vec12::Zero();
  Vec12 motor_strength = Vec12::Ones();
  Eigen::Vector2d com_shift = Eigen::Vector2d::Zero();  // trunk frame x, y
  double payload = 0.0;
  double motor_friction = 0.0;  // viscous joint damping
  double ground_friction = 1.0;
};

MorphologySpec sample_morphology(Rng& rng, const MorphologyConfig& cfg);
ControlRandomization sample_control_randomization(Rng& rng, const MorphologyConfig& cfg);

/// Ground-truth mass vector [trunk + payload, hip, thigh, calf]; the
/// hip/thigh/calf entries are single-link masses.
Vec4 mass_vector(const MorphologySpec& spec, double payload);

/// Normalizes a mass vector to zero-mean unit-scale using the randomization
/// range midpoints and half-widths; used as the estimator supervision target.
Vec4 normalize_mass_vector(const Vec4& m, const MorphologyConfig& cfg);

/// Checks every field against its range. Returns the offending field name,
/// or nullopt when the spec is valid.
std::optional<std::string> validate(const MorphologySpec& spec, const MorphologyConfig& cfg);

/// Nominal standing pose replicated across the four legs.
Vec12 standing_pose(const std::array<double, 3>& triple);

/// Base height above ground when standing at the nominal pose.
double nominal_standing_height(const MorphologySpec& spec, const Vec12& q_stand);

}  // namespace frlab
