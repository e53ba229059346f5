#include "frlab/morphology.hpp"

#include <cmath>

namespace frlab {

MorphologySpec sample_morphology(Rng& rng, const MorphologyConfig& cfg) {
  MorphologySpec s;
  s.trunk_mass = cfg.trunk_mass.sample(rng);
  s.trunk_length = cfg.trunk_length.sample(rng);
  s.trunk_width = cfg.trunk_width.sample(rng);
  s.trunk_height = cfg.trunk_height.sample(rng);
  s.hip_mass = cfg.hip_mass.sample(rng);
  s.hip_length = cfg.hip_length.sample(rng);
  s.thigh_mass = cfg.thigh_mass.sample(rng);
  s.thigh_length = cfg.thigh_length.sample(rng);
  s.thigh_width = cfg.thigh_width.sample(rng);
  s.thigh_height = cfg.thigh_height.sample(rng);
  s.calf_mass = cfg.calf_mass.sample(rng);
  s.calf_length = cfg.calf_length.sample(rng);
  s.calf_width = cfg.calf_width.sample(rng);
  s.calf_height = cfg.calf_height.sample(rng);
  for (int leg = 0; leg < 4; ++leg) {
    for (int j = 0; j < 3; ++j) {
      s.joint_limits_lower[3 * leg + j] = cfg.joint_lower[j];
      s.joint_limits_upper[3 * leg + j] = cfg.joint_upper[j];
    }
  }
  s.torque_limit = cfg.torque_limit;
  s.foot_radius = cfg.foot_radius;
  return s;
}

ControlRandomization sample_control_randomization(Rng& rng, const MorphologyConfig& cfg) {
  ControlRandomization c;
  for (int i = 0; i < 12; ++i) c.kp[i] = cfg.kp.sample(rng);
  for (int i = 0; i < 12; ++i) c.kd[i] = cfg.kd.sample(rng);
  for (int i = 0; i < 12; ++i) c.motor_strength[i] = cfg.motor_strength.sample(rng);
  c.com_shift[0] = cfg.com_shift.sample(rng);
  c.com_shift[1] = cfg.com_shift.sample(rng);
  c.payload = cfg.payload.sample(rng);
  c.motor_friction = cfg.motor_friction.sample(rng);
  c.ground_friction = cfg.ground_friction.sample(rng);
  return c;
}

Vec4 mass_vector(const MorphologySpec& spec, double payload) {
  return Vec4(spec.trunk_mass + payload, spec.hip_mass, spec.thigh_mass, spec.calf_mass);
}

Vec4 normalize_mass_vector(const Vec4& m, const MorphologyConfig& cfg) {
  Vec4 out;
  const Range* ranges[4] = {&cfg.trunk_mass, &cfg.hip_mass, &cfg.thigh_mass, &cfg.calf_mass};
  for (int i = 0; i < 4; ++i) out[i] = (m[i] - ranges[i]->mid()) / ranges[i]->half_width();
  return out;
}

std::optional<std::string> validate(const MorphologySpec& spec, const MorphologyConfig& cfg) {
  struct Check {
    const char* name;
    double value;
    const Range* range;
  };
  const Check checks[] = {
      {"trunk_mass", spec.trunk_mass, &cfg.trunk_mass},
      {"trunk_length", spec.trunk_length, &cfg.trunk_length},
      {"trunk_width", spec.trunk_width, &cfg.trunk_width},
      {"trunk_height", spec.trunk_height, &cfg.trunk_height},
      {"hip_mass", spec.hip_mass, &cfg.hip_mass},
      {"hip_length", spec.hip_length, &cfg.hip_length},
      {"thigh_mass", spec.thigh_mass, &cfg.thigh_mass},
      {"thigh_length", spec.thigh_length, &cfg.thigh_length},
      {"thigh_width", spec.thigh_width, &cfg.thigh_width},
      {"thigh_height", spec.thigh_height, &cfg.thigh_height},
      {"calf_mass", spec.calf_mass, &cfg.calf_mass},
      {"calf_length", spec.calf_length, &cfg.calf_length},
      {"calf_width", spec.calf_width, &cfg.calf_width},
      {"calf_height", spec.calf_height, &cfg.calf_height},
  };
  for (const auto& c : checks) {
    if (!c.range->contains(c.value)) {
      return std::string(c.name) + " = " + std::to_string(c.value) + " outside [" +
             std::to_string(c.range->lo) + ", " + std::to_string(c.range->hi) + "]";
    }
    if (std::string(c.name).find("mass") != std::string::npos && c.value <= 0.0) {
      return std::string(c.name) + " must be positive";
    }
  }
  for (int i = 0; i < 12; ++i) {
    if (!(spec.joint_limits_lower[i] < spec.joint_limits_upper[i])) {
      return "joint_limits at index " + std::to_string(i) + " not ordered";
    }
  }
  if (spec.torque_limit <= 0.0) return "torque_limit must be positive";
  return std::nullopt;
}

Vec12 standing_pose(const std::array<double, 3>& triple) {
  Vec12 q;
  for (int leg = 0; leg < 4; ++leg)
    for (int j = 0; j < 3; ++j) q[3 * leg + j] = triple[j];
  return q;
}

double nominal_standing_height(const MorphologySpec& spec, const Vec12& q_stand) {
  // Legs are sagittal chains: thigh pitched by q1 from vertical, calf by
  // q1 + q2. Height is measured from foot center to trunk frame origin.
  double thigh = q_stand[1];
  double calf = q_stand[1] + q_stand[2];
  return spec.thigh_length * std::cos(thigh) + spec.calf_length * std::cos(calf) +
         spec.foot_radius;
}

}  // namespace frlab
