#pragma once

#include <Eigen/Core>
#include <array>

#include "frlab/config.hpp"
#include "frlab/morphology.hpp"

namespace frlab {

/// Weighted per-term reward values for one control step; total is their
/// exact sum.
struct RewardBreakdown {
  double orientation = 0.0;
  double upright = 0.0;
  double posture = 0.0;
  double feet_contact = 0.0;
  double body_contact = 0.0;
  double knee_force = 0.0;
  double body_bias = 0.0;
  double position_limits = 0.0;
  double ang_vel_limit = 0.0;
  double joint_acc = 0.0;
  double joint_vel = 0.0;
  double action_smooth = 0.0;
  double torque = 0.0;
  double total = 0.0;

  static constexpr int kNumTerms = 13;
  std::array<double, kNumTerms> terms() const {
    return {orientation, upright,   posture,   feet_contact, body_contact,
            knee_force,  body_bias, position_limits, ang_vel_limit, joint_acc,
            joint_vel,   action_smooth, torque};
  }
  static const char* term_name(int i);
};

/// Orientation posture terms: tilt penalty, upright Gaussian, and the
/// target-posture bonus gated on near-upright gravity.
std::array<double, 3> r_orientation(const Eigen::Vector3d& g, const Vec12& q,
                                    const Vec12& q_stand, const RewardConfig& cfg);

/// Feet-contact bonus and single body-contact indicator penalty.
std::array<double, 2> r_contact(const std::array<bool, 4>& feet_contact, bool body_contact_any,
                                const RewardConfig& cfg);

/// Knee horizontal-force penalty and clipped body displacement penalty.
std::array<double, 2> r_stability(const std::array<Eigen::Vector2d, 4>& knee_force_xy,
                                  const Eigen::Vector2d& p_current_xy,
                                  const Eigen::Vector2d& p_init_xy, const RewardConfig& cfg);

/// Motion constraints: limit violations, velocity/acceleration/torque
/// magnitudes and action smoothing.
std::array<double, 6> r_motion(const Vec12& q, const Vec12& qd, const Vec12& qdd,
                               const Vec12& tau, const Vec12& action, const Vec12& prev_action,
                               const Vec12& q_lower, const Vec12& q_upper,
                               const RewardConfig& cfg);

/// Sums the weighted terms into breakdown.total and returns it.
double total(RewardBreakdown& breakdown);

struct RewardInputs {
  Eigen::Vector3d gravity;  // unit, base frame
  Vec12 q, qd, qdd, tau;
  Vec12 action, prev_action;
  Vec12 q_lower, q_upper;
  Vec12 q_stand;
  std::array<bool, 4> feet_contact{};
  bool body_contact_any = false;
  std::array<Eigen::Vector2d, 4> knee_force_xy{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                               Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  Eigen::Vector2d p_current_xy = Eigen::Vector2d::Zero();
  Eigen::Vector2d p_init_xy = Eigen::Vector2d::Zero();
  double dt = 0.02;
};

RewardBreakdown compute_rewards(const RewardInputs& in, const RewardConfig& cfg);

}  // namespace frlab
