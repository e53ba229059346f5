#pragma once

#include <Eigen/Dense>
#include <array>

#include "frlab/config.hpp"
#include "frlab/morphology.hpp"
#include "frlab/robot_model.hpp"
#include "frlab/rng.hpp"
#include "frlab/terrain.hpp"

namespace frlab {

struct SimState {
  Eigen::Vector3d base_pos = Eigen::Vector3d::Zero();
  Eigen::Quaterniond base_quat = Eigen::Quaterniond::Identity();  // world from base
  Eigen::Vector3d base_lin_vel = Eigen::Vector3d::Zero();         // base origin, world
  Eigen::Vector3d base_ang_vel = Eigen::Vector3d::Zero();         // world
  Vec12 q = Vec12::Zero();
  Vec12 qd = Vec12::Zero();
  double time = 0.0;

  bool finite() const;
  /// World gravity direction expressed in the base frame (unit vector).
  Eigen::Vector3d projected_gravity() const;
};

struct ContactReport {
  std::array<bool, 13> component_contact{};  // base, hips, thighs, calves
  std::array<bool, 4> foot_contact{};
  Vec4 foot_normal_force = Vec4::Zero();                 // N
  std::array<Eigen::Vector2d, 4> knee_force_xy{
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
      Eigen::Vector2d::Zero()};  // world horizontal force on each calf, feet excluded

  bool any_body_contact() const {
    for (bool b : component_contact)
      if (b) return true;
    return false;
  }
};

struct StepResult {
  ContactReport contacts;
  Vec12 applied_torque = Vec12::Zero();  // mean PD torque over substeps
  bool fault = false;                    // non-finite state detected
};

/// Joint-level PD torque with per-joint motor strength scaling and symmetric
/// clamping: tau_i = clamp(strength_i * (kp_i (q*_i - q_i) - kd_i qd_i)).
Vec12 pd_torque(const Vec12& kp, const Vec12& kd, const Vec12& q_target, const Vec12& q,
                const Vec12& qd, const Vec12& strength, double torque_limit);

/// Reduced-coordinate articulated simulator for one environment: floating
/// trunk plus 12 revolute joints against a heightfield, semi-implicit Euler
/// with penalty contacts and Coulomb friction.
class QuadrupedSim {
 public:
  QuadrupedSim(const MorphologySpec& spec, const ControlRandomization& ctrl,
               const SimConfig& cfg, const Heightfield* terrain, const Vec12& q_stand);

  /// Drops the robot ventral-side-up over the spawn region, randomizes yaw
  /// and joint angles, and settles briefly so the initial pose rests on the
  /// terrain without meaningful penetration.
  SimState reset_supine(Rng& rng);

  /// Advances one control period (substeps x dt_physics), recomputing the PD
  /// torque from q_target each substep. Contact flags are OR-ed and forces
  /// averaged across substeps.
  StepResult step_control(const Vec12& q_target);

  /// Instantaneous contact report from the current state (spring forces,
  /// gap-based flags); no integration.
  ContactReport contact_report() const;

  const SimState& state() const { return state_; }
  void set_state(const SimState& s) { state_ = s; }
  const RobotModel& model() const { return model_; }
  const ControlRandomization& control() const { return ctrl_; }
  const Heightfield* terrain() const { return terrain_; }

  /// Kinetic plus gravitational potential energy of the articulated system.
  double mechanical_energy() const;

  /// Max penetration depth over all collision geoms, in meters (0 if none).
  double max_penetration() const;

  /// World positions of base, hips, knees and feet for rendering.
  void skeleton_points(Eigen::Vector3d& base, std::array<Eigen::Vector3d, 4>& hips,
                       std::array<Eigen::Vector3d, 4>& knees,
                       std::array<Eigen::Vector3d, 4>& feet) const;

 private:
  struct Kinematics;
  struct Contact;

  void forward_kinematics(const SimState& s, Kinematics& k) const;
  void detect_contacts(const Kinematics& k, const Eigen::Matrix<double, kNumDofs, 1>& u,
                       std::vector<Contact>& out) const;
  bool substep(const Vec12& q_target, Vec12& tau_out, ContactReport& report);

  RobotModel model_;
  ControlRandomization ctrl_;
  SimConfig cfg_;
  const Heightfield* terrain_;
  SimState state_;
};

}  // namespace frlab
