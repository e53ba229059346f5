#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "frlab/morphology.hpp"

namespace frlab {

// Body indices: 0 = trunk, then hip/thigh/calf per leg in leg order
// FL, FR, RL, RR. Joint j (0..11) drives body j+1.
inline constexpr int kNumBodies = 13;
inline constexpr int kNumJoints = 12;
inline constexpr int kNumDofs = 18;  // 6 floating base + 12 joints

/// Index into the 13-entry per-component contact vector:
/// [base, hip FL/FR/RL/RR, thigh FL/FR/RL/RR, calf FL/FR/RL/RR].
enum class ContactComponent { Base = 0, Hip = 1, Thigh = 5, Calf = 9 };

struct BodyDef {
  int parent = -1;                                       // -1 for the trunk
  Eigen::Vector3d joint_anchor = Eigen::Vector3d::Zero();  // in parent frame
  Eigen::Vector3d joint_axis = Eigen::Vector3d::UnitX();   // in child frame
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();  // body frame
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity();  // about com, body frame
};

enum class GeomKind { TrunkPoint, HipSphere, ThighSphere, CalfSphere, FootSphere };

struct GeomDef {
  int body = 0;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // body frame
  double radius = 0.0;
  GeomKind kind = GeomKind::TrunkPoint;
  int leg = -1;  // 0..3, -1 for trunk
};

/// Kinematic tree, inertias and collision geometry for one sampled robot.
/// COM shift and payload are folded into the trunk here.
struct RobotModel {
  std::array<BodyDef, kNumBodies> bodies;
  std::vector<GeomDef> geoms;
  Vec12 q_lower = Vec12::Zero();
  Vec12 q_upper = Vec12::Zero();
  double torque_limit = 0.0;
  double total_mass = 0.0;
  double standing_height = 0.0;
};

RobotModel build_robot_model(const MorphologySpec& spec, const ControlRandomization& ctrl,
                             const Vec12& q_stand);

}  // namespace frlab
