#include "frlab/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace frlab {

const char* RewardBreakdown::term_name(int i) {
  static const char* names[kNumTerms] = {
      "orientation", "upright",       "posture",       "feet_contact", "body_contact",
      "knee_force",  "body_bias",     "position_limits", "ang_vel_limit", "joint_acc",
      "joint_vel",   "action_smooth", "torque"};
  return names[i];
}

std::array<double, 3> r_orientation(const Eigen::Vector3d& g, const Vec12& q,
                                    const Vec12& q_stand, const RewardConfig& cfg) {
  double tilt = g.x() * g.x() + g.y() * g.y();
  double gz1 = g.z() + 1.0;
  double upright = std::exp(-gz1 * gz1 / (2.0 * cfg.eps_gauss * cfg.eps_gauss));
  double posture = 0.0;
  if (std::abs(gz1) < cfg.eps_ind) {
    posture = std::exp(-(q - q_stand).squaredNorm());
  }
  return {cfg.w_orientation * tilt, cfg.w_upright * upright, cfg.w_posture * posture};
}

std::array<double, 2> r_contact(const std::array<bool, 4>& feet_contact, bool body_contact_any,
                                const RewardConfig& cfg) {
  int feet = 0;
  for (bool b : feet_contact) feet += b ? 1 : 0;
  return {cfg.w_feet_contact * feet, cfg.w_body_contact * (body_contact_any ? 1.0 : 0.0)};
}

std::array<double, 2> r_stability(const std::array<Eigen::Vector2d, 4>& knee_force_xy,
                                  const Eigen::Vector2d& p_current_xy,
                                  const Eigen::Vector2d& p_init_xy, const RewardConfig& cfg) {
  double force_sum = 0.0;
  for (const auto& f : knee_force_xy) force_sum += f.norm();
  double bias = std::clamp((p_current_xy - p_init_xy).norm(), 0.0, cfg.body_bias_clip);
  return {cfg.w_knee_force * force_sum, cfg.w_body_bias * bias};
}

std::array<double, 6> r_motion(const Vec12& q, const Vec12& qd, const Vec12& qdd,
                               const Vec12& tau, const Vec12& action, const Vec12& prev_action,
                               const Vec12& q_lower, const Vec12& q_upper,
                               const RewardConfig& cfg) {
  int violations = 0;
  double ang_excess = 0.0;
  for (int i = 0; i < 12; ++i) {
    if (q[i] > q_upper[i] || q[i] < q_lower[i]) violations++;
    ang_excess += std::max(std::abs(qd[i]) - cfg.ang_vel_soft_limit, 0.0);
  }
  return {cfg.w_position_limits * violations,
          cfg.w_ang_vel_limit * ang_excess,
          cfg.w_joint_acc * qdd.squaredNorm(),
          cfg.w_joint_vel * qd.squaredNorm(),
          cfg.w_action_smooth * (action - prev_action).squaredNorm(),
          cfg.w_torque * tau.squaredNorm()};
}

double total(RewardBreakdown& b) {
  double sum = 0.0;
  for (double t : b.terms()) sum += t;
  b.total = sum;
  return sum;
}

RewardBreakdown compute_rewards(const RewardInputs& in, const RewardConfig& cfg) {
  RewardBreakdown b;
  auto ori = r_orientation(in.gravity, in.q, in.q_stand, cfg);
  b.orientation = ori[0];
  b.upright = ori[1];
  b.posture = ori[2];
  auto con = r_contact(in.feet_contact, in.body_contact_any, cfg);
  b.feet_contact = con[0];
  b.body_contact = con[1];
  auto stab = r_stability(in.knee_force_xy, in.p_current_xy, in.p_init_xy, cfg);
  b.knee_force = stab[0];
  b.body_bias = stab[1];
  auto mot = r_motion(in.q, in.qd, in.qdd, in.tau, in.action, in.prev_action, in.q_lower,
                      in.q_upper, cfg);
  b.position_limits = mot[0];
  b.ang_vel_limit = mot[1];
  b.joint_acc = mot[2];
  b.joint_vel = mot[3];
  b.action_smooth = mot[4];
  b.torque = mot[5];
  if (cfg.scale_by_dt) {
    double scale = in.dt;
    b.orientation *= scale;
    b.upright *= scale;
    b.posture *= scale;
    b.feet_contact *= scale;
    b.body_contact *= scale;
    b.knee_force *= scale;
    b.body_bias *= scale;
    b.position_limits *= scale;
    b.ang_vel_limit *= scale;
    b.joint_acc *= scale;
    b.joint_vel *= scale;
    b.action_smooth *= scale;
    b.torque *= scale;
  }
  total(b);
  return b;
}

}  // namespace frlab
