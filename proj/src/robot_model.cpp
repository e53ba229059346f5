#include "frlab/robot_model.hpp"

namespace frlab {
namespace {

Eigen::Matrix3d box_inertia(double m, double lx, double ly, double lz) {
  Eigen::Matrix3d I = Eigen::Matrix3d::Zero();
  I(0, 0) = m / 12.0 * (ly * ly + lz * lz);
  I(1, 1) = m / 12.0 * (lx * lx + lz * lz);
  I(2, 2) = m / 12.0 * (lx * lx + ly * ly);
  return I;
}

Eigen::Matrix3d sphere_inertia(double m, double r) {
  return Eigen::Matrix3d::Identity() * (0.4 * m * r * r);
}

}  // namespace

RobotModel build_robot_model(const MorphologySpec& spec, const ControlRandomization& ctrl,
                             const Vec12& q_stand) {
  RobotModel model;
  const double sx[4] = {1, 1, -1, -1};  // FL, FR, RL, RR
  const double sy[4] = {1, -1, 1, -1};
  const double hip_radius = 0.05;

  BodyDef trunk;
  trunk.parent = -1;
  trunk.mass = spec.trunk_mass + ctrl.payload;
  trunk.com = Eigen::Vector3d(ctrl.com_shift[0], ctrl.com_shift[1], 0.0);
  trunk.inertia = box_inertia(trunk.mass, spec.trunk_length, spec.trunk_width, spec.trunk_height);
  model.bodies[0] = trunk;

  for (int leg = 0; leg < 4; ++leg) {
    BodyDef hip;
    hip.parent = 0;
    hip.joint_anchor =
        Eigen::Vector3d(sx[leg] * spec.trunk_length / 2, sy[leg] * spec.trunk_width / 2, 0.0);
    hip.joint_axis = Eigen::Vector3d::UnitX();
    hip.mass = spec.hip_mass;
    hip.com = Eigen::Vector3d(0.0, sy[leg] * spec.hip_length / 2, 0.0);
    hip.inertia = sphere_inertia(spec.hip_mass, hip_radius);
    model.bodies[1 + 3 * leg] = hip;

    BodyDef thigh;
    thigh.parent = 1 + 3 * leg;
    thigh.joint_anchor = Eigen::Vector3d(0.0, sy[leg] * spec.hip_length, 0.0);
    thigh.joint_axis = Eigen::Vector3d::UnitY();
    thigh.mass = spec.thigh_mass;
    thigh.com = Eigen::Vector3d(0.0, 0.0, -spec.thigh_length / 2);
    thigh.inertia =
        box_inertia(spec.thigh_mass, spec.thigh_width, spec.thigh_height, spec.thigh_length);
    model.bodies[2 + 3 * leg] = thigh;

    BodyDef calf;
    calf.parent = 2 + 3 * leg;
    calf.joint_anchor = Eigen::Vector3d(0.0, 0.0, -spec.thigh_length);
    calf.joint_axis = Eigen::Vector3d::UnitY();
    calf.mass = spec.calf_mass;
    calf.com = Eigen::Vector3d(0.0, 0.0, -spec.calf_length / 2);
    calf.inertia =
        box_inertia(spec.calf_mass, spec.calf_width, spec.calf_height, spec.calf_length);
    model.bodies[3 + 3 * leg] = calf;
  }

  // Trunk collision: the eight box corners.
  for (int cx = -1; cx <= 1; cx += 2)
    for (int cy = -1; cy <= 1; cy += 2)
      for (int cz = -1; cz <= 1; cz += 2) {
        GeomDef g;
        g.body = 0;
        g.offset = Eigen::Vector3d(cx * spec.trunk_length / 2, cy * spec.trunk_width / 2,
                                   cz * spec.trunk_height / 2);
        g.radius = 0.0;
        g.kind = GeomKind::TrunkPoint;
        model.geoms.push_back(g);
      }

  const double thigh_r = std::max(spec.thigh_width, spec.thigh_height) / 2;
  const double calf_r = std::max(spec.calf_width, spec.calf_height) / 2;
  for (int leg = 0; leg < 4; ++leg) {
    GeomDef hip_g;
    hip_g.body = 1 + 3 * leg;
    hip_g.offset = Eigen::Vector3d(0.0, sy[leg] * spec.hip_length / 2, 0.0);
    hip_g.radius = hip_radius;
    hip_g.kind = GeomKind::HipSphere;
    hip_g.leg = leg;
    model.geoms.push_back(hip_g);

    for (double f : {0.2, 0.5, 0.8}) {
      GeomDef g;
      g.body = 2 + 3 * leg;
      g.offset = Eigen::Vector3d(0.0, 0.0, -f * spec.thigh_length);
      g.radius = thigh_r;
      g.kind = GeomKind::ThighSphere;
      g.leg = leg;
      model.geoms.push_back(g);
    }
    // The first calf sample sits at the knee; it carries a knee-cap radius.
    const double knee_radius = 0.025;
    const double fractions[3] = {0.05, 0.5, 0.85};
    const double radii[3] = {knee_radius, calf_r, calf_r};
    for (int k = 0; k < 3; ++k) {
      GeomDef g;
      g.body = 3 + 3 * leg;
      g.offset = Eigen::Vector3d(0.0, 0.0, -fractions[k] * spec.calf_length);
      g.radius = radii[k];
      g.kind = GeomKind::CalfSphere;
      g.leg = leg;
      model.geoms.push_back(g);
    }

    GeomDef foot;
    foot.body = 3 + 3 * leg;
    foot.offset = Eigen::Vector3d(0.0, 0.0, -spec.calf_length);
    foot.radius = spec.foot_radius;
    foot.kind = GeomKind::FootSphere;
    foot.leg = leg;
    model.geoms.push_back(foot);
  }

  model.q_lower = spec.joint_limits_lower;
  model.q_upper = spec.joint_limits_upper;
  model.torque_limit = spec.torque_limit;
  model.total_mass = trunk.mass + 4 * (spec.hip_mass + spec.thigh_mass + spec.calf_mass);
  model.standing_height = nominal_standing_height(spec, q_stand);
  return model;
}

}  // namespace frlab
