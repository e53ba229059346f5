#include <cmath>

#include "doctest.h"
#include "frlab/sim.hpp"

using namespace frlab;

namespace {

struct Fixture {
  MorphologyConfig mcfg;
  SimConfig scfg;
  TerrainConfig tcfg;
  MorphologySpec spec;
  ControlRandomization ctrl;
  Heightfield flat;
  Vec12 q_stand;

  Fixture() {
    Rng rng(1234);
    spec = sample_morphology(rng, mcfg);
    ctrl = sample_control_randomization(rng, mcfg);
    flat = generate_terrain(TerrainFamily::Flat, 1, 1, tcfg);
    std::array<double, 3> triple{0.0, 0.8, -1.5};
    q_stand = standing_pose(triple);
  }

  // Mid-range robot with chosen gains, standing pose, zero payload/shift.
  void neutral() {
    spec.trunk_mass = 8.0;
    spec.trunk_length = 0.5;
    spec.trunk_width = 0.2;
    spec.trunk_height = 0.12;
    spec.hip_mass = 0.5;
    spec.hip_length = 0.04;
    spec.thigh_mass = 1.2;
    spec.thigh_length = 0.28;
    spec.thigh_width = 0.03;
    spec.thigh_height = 0.04;
    spec.calf_mass = 0.3;
    spec.calf_length = 0.28;
    spec.calf_width = 0.018;
    spec.calf_height = 0.016;
    ctrl.kp = Vec12::Constant(40.0);
    ctrl.kd = Vec12::Constant(1.0);
    ctrl.motor_strength = Vec12::Ones();
    ctrl.com_shift.setZero();
    ctrl.payload = 0.0;
    ctrl.motor_friction = 0.5;
    ctrl.ground_friction = 0.8;
  }
};

SimState standing_state(const Fixture& f) {
  SimState s;
  s.base_pos = Eigen::Vector3d(0, 0, 0.28 * std::cos(0.8) + 0.28 * std::cos(0.7) + 0.022);
  s.q = f.q_stand;
  return s;
}

}  // namespace

TEST_CASE("pd torque formula, arithmetic and clamp") {
  Vec12 kp = Vec12::Constant(20.0), kd = Vec12::Constant(0.6);
  Vec12 q = Vec12::Zero(), qd = Vec12::Zero(), strength = Vec12::Ones();
  Vec12 target = Vec12::Constant(0.1);
  Vec12 tau = pd_torque(kp, kd, target, q, qd, strength, 23.7);
  CHECK(tau[0] == doctest::Approx(2.0).epsilon(1e-12));

  qd = Vec12::Constant(1.0);
  tau = pd_torque(kp, kd, target, q, qd, strength, 23.7);
  CHECK(tau[3] == doctest::Approx(1.4).epsilon(1e-12));

  kp = Vec12::Constant(300.0);
  qd.setZero();
  tau = pd_torque(kp, kd, target, q, qd, strength, 23.7);  // unclamped 30
  CHECK(tau[7] == doctest::Approx(23.7).epsilon(1e-12));

  strength = Vec12::Constant(1.1);
  kp = Vec12::Constant(20.0);
  tau = pd_torque(kp, kd, target, q, qd, strength, 23.7);
  CHECK(tau[0] == doctest::Approx(2.2).epsilon(1e-12));
}

TEST_CASE("free fall matches ballistics exactly") {
  Fixture f;
  f.neutral();
  f.ctrl.kp.setZero();
  f.ctrl.kd.setZero();
  f.ctrl.motor_friction = 0.0;
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, f.q_stand);
  SimState s = standing_state(f);
  s.base_pos.z() = 5.0;
  sim.set_state(s);
  StepResult r = sim.step_control(f.q_stand);
  CHECK(!r.fault);
  CHECK(sim.state().base_lin_vel.z() ==
        doctest::Approx(-9.81 * 0.02).epsilon(1e-9));
  CHECK(sim.state().base_lin_vel.x() == doctest::Approx(0.0).epsilon(1e-12));
  // no contact while airborne
  CHECK(!r.contacts.any_body_contact());
  for (int leg = 0; leg < 4; ++leg) {
    CHECK(!r.contacts.foot_contact[leg]);
    CHECK(r.contacts.foot_normal_force[leg] == 0.0);
  }
}

TEST_CASE("static rest balances weight within 2%") {
  Fixture f;
  f.neutral();
  // tall stance with stiff hold gains keeps the calves clear of the ground
  Vec12 pose = standing_pose({0.0, 0.5, -1.0});
  f.ctrl.kp = Vec12::Constant(80.0);
  f.ctrl.kd = Vec12::Constant(2.0);
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, pose);
  SimState s;
  s.q = pose;
  s.base_pos = Eigen::Vector3d(0, 0, 0.28 * std::cos(0.5) + 0.28 * std::cos(0.5) + 0.022);
  sim.set_state(s);
  for (int i = 0; i < 100; ++i) sim.step_control(pose);  // settle 2 s

  double weight = sim.model().total_mass * f.scfg.gravity;
  double force_sum = 0.0;
  const int n = 25;
  ContactReport last;
  for (int i = 0; i < n; ++i) {
    StepResult r = sim.step_control(pose);
    force_sum += r.contacts.foot_normal_force.sum();
    last = r.contacts;
  }
  CHECK(force_sum / n == doctest::Approx(weight).epsilon(0.02));
  int feet = 0;
  for (int leg = 0; leg < 4; ++leg) feet += last.foot_contact[leg] ? 1 : 0;
  CHECK(feet == 4);
  CHECK(!last.any_body_contact());  // only the feet carry the robot
}

TEST_CASE("trajectories are bitwise deterministic") {
  Fixture f;
  f.neutral();
  auto run = [&](std::vector<double>& out) {
    QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, f.q_stand);
    Rng rng(99);
    sim.reset_supine(rng);
    for (int i = 0; i < 100; ++i) {
      Vec12 target = f.q_stand * std::sin(0.05 * i);
      sim.step_control(target);
      out.push_back(sim.state().base_pos.z());
      out.push_back(sim.state().q[5]);
      out.push_back(sim.state().qd[11]);
    }
  };
  std::vector<double> a, b;
  run(a);
  run(b);
  CHECK(a == b);
}

TEST_CASE("supine reset: ventral side up, deterministic, settled") {
  Fixture f;
  f.neutral();
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, f.q_stand);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    SimState s = sim.reset_supine(rng);
    CHECK(s.projected_gravity().z() > 0.7);
    CHECK(s.time == 0.0);
    CHECK(sim.max_penetration() < 1e-3);
  }
  Rng r1(5), r2(5);
  SimState s1 = sim.reset_supine(r1);
  SimState s2 = sim.reset_supine(r2);
  CHECK(s1.base_pos == s2.base_pos);
  CHECK(s1.q == s2.q);
  CHECK(s1.base_quat.coeffs() == s2.base_quat.coeffs());
}

TEST_CASE("mechanical energy is non-increasing without actuation or friction") {
  Fixture f;
  f.neutral();
  f.ctrl.kp.setZero();
  f.ctrl.kd.setZero();
  f.ctrl.motor_friction = 0.0;
  f.ctrl.ground_friction = 0.0;
  SimConfig scfg = f.scfg;
  scfg.limit_stiffness = 0.0;
  scfg.limit_damping = 0.0;
  QuadrupedSim sim(f.spec, f.ctrl, scfg, &f.flat, f.q_stand);
  Rng rng(17);
  sim.reset_supine(rng);
  double e0 = sim.mechanical_energy();
  for (int i = 0; i < 100; ++i) {  // 2 s
    sim.step_control(sim.state().q);
    double e = sim.mechanical_energy();
    double t = (i + 1) * 0.02;
    // non-increasing within 1% of |E0| drift per simulated second
    CHECK(e <= e0 + 0.01 * std::abs(e0) * t + 1e-9);
  }
  CHECK(sim.mechanical_energy() <= e0 + 0.01 * std::abs(e0) * 2.0);
}

TEST_CASE("energy is conserved in torque-free zero-gravity flight") {
  Fixture f;
  f.neutral();
  f.ctrl.kp.setZero();
  f.ctrl.kd.setZero();
  f.ctrl.motor_friction = 0.0;
  SimConfig scfg = f.scfg;
  scfg.gravity = 0.0;
  scfg.limit_stiffness = 0.0;
  scfg.limit_damping = 0.0;
  scfg.joint_armature = 0.0;
  QuadrupedSim sim(f.spec, f.ctrl, scfg, &f.flat, f.q_stand);
  SimState s = standing_state(f);
  s.base_pos.z() = 10.0;
  s.base_ang_vel = Eigen::Vector3d(0.7, -0.4, 0.9);
  s.base_lin_vel = Eigen::Vector3d(0.3, 0.2, 0.1);
  s.qd = Vec12::Constant(2.0);
  sim.set_state(s);
  double e0 = sim.mechanical_energy();
  for (int i = 0; i < 50; ++i) sim.step_control(s.q);
  double e1 = sim.mechanical_energy();
  CHECK(std::abs(e1 - e0) <= 0.01 * std::abs(e0));
}

TEST_CASE("feet approaching at 2 m/s never sink past 5 mm") {
  Fixture f;
  f.neutral();
  SimConfig scfg = f.scfg;
  scfg.control_dt = 0.005;  // one substep per control step to observe each substep end
  scfg.substeps = 1;
  QuadrupedSim sim(f.spec, f.ctrl, scfg, &f.flat, f.q_stand);
  SimState s = standing_state(f);
  s.base_pos.z() += 0.05;
  s.base_lin_vel = Eigen::Vector3d(0, 0, -2.0);
  sim.set_state(s);
  for (int i = 0; i < 200; ++i) {
    sim.step_control(f.q_stand);
    double foot_pen = 0.0;
    Eigen::Vector3d base;
    std::array<Eigen::Vector3d, 4> hips, knees, feet;
    sim.skeleton_points(base, hips, knees, feet);
    for (int leg = 0; leg < 4; ++leg) {
      double gap = feet[leg].z() - f.spec.foot_radius - f.flat.height_at(feet[leg].x(), feet[leg].y());
      foot_pen = std::max(foot_pen, -gap);
    }
    CHECK(foot_pen <= 0.005);
  }
}

TEST_CASE("quaternion norm stays exact over long rollouts") {
  Fixture f;
  f.neutral();
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, f.q_stand);
  Rng rng(3);
  sim.reset_supine(rng);
  for (int i = 0; i < 500; ++i) {
    sim.step_control(f.q_stand * std::cos(0.02 * i));
    CHECK(std::abs(sim.state().base_quat.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("instantaneous contact report on a vertical riser shows horizontal knee force") {
  Fixture f;
  f.neutral();
  // wall: one-cell ramp up to 1 m at x >= 0.5
  Heightfield wall;
  wall.origin = Eigen::Vector2d(-2.0, -2.0);
  wall.cell_size = 0.05;
  int n = 81;
  wall.grid.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    double x = wall.origin[0] + i * wall.cell_size;
    for (int j = 0; j < n; ++j)
      if (x >= 0.5) wall.grid(i, j) = 1.0;
  }
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &wall, f.q_stand);
  SimState s;
  s.q = Vec12::Zero();  // legs straight down
  // front legs hang over the one-cell ramp face at x in (0.45, 0.5)
  s.base_pos = Eigen::Vector3d(0.477 - f.spec.trunk_length / 2, 0.0, 0.9);
  sim.set_state(s);
  ContactReport rep = sim.contact_report();
  bool front_calf = rep.component_contact[9] || rep.component_contact[10];
  CHECK(front_calf);
  double fxy = std::max(rep.knee_force_xy[0].norm(), rep.knee_force_xy[1].norm());
  CHECK(fxy > 0.0);
}

TEST_CASE("airborne robot reports no contacts") {
  Fixture f;
  f.neutral();
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, f.q_stand);
  SimState s = standing_state(f);
  s.base_pos.z() = 3.0;
  sim.set_state(s);
  ContactReport rep = sim.contact_report();
  CHECK(!rep.any_body_contact());
  for (int leg = 0; leg < 4; ++leg) {
    CHECK(!rep.foot_contact[leg]);
    CHECK(rep.foot_normal_force[leg] == 0.0);
    CHECK(rep.knee_force_xy[leg].norm() == 0.0);
  }
}

TEST_CASE("non-finite states raise the fault signal") {
  Fixture f;
  f.neutral();
  QuadrupedSim sim(f.spec, f.ctrl, f.scfg, &f.flat, f.q_stand);
  SimState s = standing_state(f);
  s.base_lin_vel.x() = std::numeric_limits<double>::quiet_NaN();
  sim.set_state(s);
  StepResult r = sim.step_control(f.q_stand);
  CHECK(r.fault);
}
