#include "frlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace frlab {

namespace {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecDof = Eigen::Matrix<double, kNumDofs, 1>;
using MatDof = Eigen::Matrix<double, kNumDofs, kNumDofs>;

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Plücker motion/force cross products; vectors are [angular; linear] at the
// world origin.
Vec6 cross_motion(const Vec6& a, const Vec6& b) {
  Vec6 out;
  out.head<3>() = a.head<3>().cross(b.head<3>());
  out.tail<3>() = a.head<3>().cross(b.tail<3>()) + a.tail<3>().cross(b.head<3>());
  return out;
}

Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = v.head<3>().cross(f.tail<3>());
  return out;
}

// Spatial inertia (6x6 at the world origin) of a body with world-frame com c
// and rotational inertia I about its com.
Mat6 spatial_inertia(double m, const Vec3& c, const Mat3& I_com) {
  Mat6 I6;
  Mat3 cx = skew(c);
  I6.topLeftCorner<3, 3>() = I_com + m * cx * cx.transpose();
  I6.topRightCorner<3, 3>() = m * cx;
  I6.bottomLeftCorner<3, 3>() = m * cx.transpose();
  I6.bottomRightCorner<3, 3>() = m * Mat3::Identity();
  return I6;
}

}  // namespace

bool SimState::finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  for (int i = 0; i < 3; ++i)
    if (!ok(base_pos[i]) || !ok(base_lin_vel[i]) || !ok(base_ang_vel[i])) return false;
  for (int i = 0; i < 4; ++i)
    if (!ok(base_quat.coeffs()[i])) return false;
  for (int i = 0; i < 12; ++i)
    if (!ok(q[i]) || !ok(qd[i])) return false;
  return ok(time);
}

Eigen::Vector3d SimState::projected_gravity() const {
  return base_quat.conjugate() * Eigen::Vector3d(0, 0, -1);
}

Vec12 pd_torque(const Vec12& kp, const Vec12& kd, const Vec12& q_target, const Vec12& q,
                const Vec12& qd, const Vec12& strength, double torque_limit) {
  Vec12 tau;
  for (int i = 0; i < 12; ++i) {
    double t = strength[i] * (kp[i] * (q_target[i] - q[i]) - kd[i] * qd[i]);
    tau[i] = std::clamp(t, -torque_limit, torque_limit);
  }
  return tau;
}

struct QuadrupedSim::Kinematics {
  std::array<Mat3, kNumBodies> R;
  std::array<Vec3, kNumBodies> pos;   // body frame origins, world
  std::array<Vec3, kNumBodies> com;   // world
  std::array<Mat3, kNumBodies> Icom;  // world axes
  std::array<Vec3, kNumJoints> axis;  // world
  std::array<Vec3, kNumJoints> anchor;
};

struct QuadrupedSim::Contact {
  int geom = 0;
  Vec3 point = Vec3::Zero();
  Vec3 n = Vec3::UnitZ(), t1 = Vec3::UnitX(), t2 = Vec3::UnitY();
  double gap = 0.0;
  VecDof Jn, Jt1, Jt2;
  VecDof MiJn, MiJt1, MiJt2;
  double wn = 1.0, wt1 = 1.0, wt2 = 1.0;
  double lam_n = 0.0, lam_t1 = 0.0, lam_t2 = 0.0;
};

QuadrupedSim::QuadrupedSim(const MorphologySpec& spec, const ControlRandomization& ctrl,
                           const SimConfig& cfg, const Heightfield* terrain,
                           const Vec12& q_stand)
    : model_(build_robot_model(spec, ctrl, q_stand)), ctrl_(ctrl), cfg_(cfg), terrain_(terrain) {}

void QuadrupedSim::forward_kinematics(const SimState& s, Kinematics& k) const {
  k.R[0] = s.base_quat.toRotationMatrix();
  k.pos[0] = s.base_pos;
  for (int i = 1; i < kNumBodies; ++i) {
    const BodyDef& b = model_.bodies[i];
    int j = i - 1;
    k.anchor[j] = k.pos[b.parent] + k.R[b.parent] * b.joint_anchor;
    Mat3 Rj =
        Eigen::AngleAxisd(s.q[j], b.joint_axis).toRotationMatrix();
    k.R[i] = k.R[b.parent] * Rj;
    k.pos[i] = k.anchor[j];
    k.axis[j] = k.R[i] * b.joint_axis;  // axis is invariant under its own rotation
  }
  for (int i = 0; i < kNumBodies; ++i) {
    const BodyDef& b = model_.bodies[i];
    k.com[i] = k.pos[i] + k.R[i] * b.com;
    k.Icom[i] = k.R[i] * b.inertia * k.R[i].transpose();
  }
}

namespace {

// Motion subspace of revolute joint j in world-origin coordinates.
Vec6 joint_subspace(const Vec3& axis, const Vec3& anchor) {
  Vec6 s;
  s.head<3>() = axis;
  s.tail<3>() = anchor.cross(axis);
  return s;
}

}  // namespace

void QuadrupedSim::detect_contacts(const Kinematics& k, const VecDof& u,
                                   std::vector<Contact>& out) const {
  const double dt = cfg_.dt_physics();
  const double margin = 0.005;
  out.clear();
  // Body point velocities for speculative activation of fast approaches.
  std::array<Vec3, kNumBodies> omega, v_origin;
  omega[0] = u.segment<3>(0);
  v_origin[0] = u.segment<3>(3);
  for (int i = 1; i < kNumBodies; ++i) {
    int parent = model_.bodies[i].parent;
    int j = i - 1;
    omega[i] = omega[parent] + k.axis[j] * u[6 + j];
    v_origin[i] = v_origin[parent] + k.anchor[j].cross(k.axis[j]) * u[6 + j];
  }
  for (size_t gi = 0; gi < model_.geoms.size(); ++gi) {
    const GeomDef& g = model_.geoms[gi];
    Vec3 center = k.pos[g.body] + k.R[g.body] * g.offset;
    double h = terrain_->height_at(center.x(), center.y());
    Vec3 n = terrain_->normal_at(center.x(), center.y());
    double gap = (center.z() - h) * n.z() - g.radius;
    Vec3 v_point = v_origin[g.body] + omega[g.body].cross(center);
    double predicted = gap + dt * v_point.dot(n);
    if (gap > margin && predicted > margin) continue;
    Contact c;
    c.geom = static_cast<int>(gi);
    c.n = n;
    c.point = center - n * g.radius;
    c.gap = gap;
    Vec3 ref = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    c.t1 = n.cross(ref).normalized();
    c.t2 = n.cross(c.t1);
    out.push_back(c);
  }
}

bool QuadrupedSim::substep(const Vec12& q_target, Vec12& tau_out, ContactReport& report) {
  const double dt = cfg_.dt_physics();
  SimState& s = state_;

  Kinematics kin;
  forward_kinematics(s, kin);

  // Generalized velocity in world-origin Plücker coordinates:
  // [base angular; velocity of the base point at the origin; joint rates].
  VecDof u;
  u.segment<3>(0) = s.base_ang_vel;
  u.segment<3>(3) = s.base_lin_vel - s.base_ang_vel.cross(s.base_pos);
  u.segment<12>(6) = s.qd;

  std::array<Vec6, kNumJoints> S;
  for (int j = 0; j < kNumJoints; ++j) S[j] = joint_subspace(kin.axis[j], kin.anchor[j]);

  std::array<Vec6, kNumBodies> v;
  v[0] = u.head<6>();
  for (int i = 1; i < kNumBodies; ++i)
    v[i] = v[model_.bodies[i].parent] + S[i - 1] * u[6 + i - 1];

  std::array<Mat6, kNumBodies> I6;
  for (int i = 0; i < kNumBodies; ++i)
    I6[i] = spatial_inertia(model_.bodies[i].mass, kin.com[i], kin.Icom[i]);

  // Bias forces by recursive Newton-Euler with zero accelerations and the
  // gravity offset applied at the base.
  std::array<Vec6, kNumBodies> a;
  Vec6 a_ground = Vec6::Zero();
  a_ground.tail<3>() = Vec3(0, 0, cfg_.gravity);
  a[0] = a_ground;
  for (int i = 1; i < kNumBodies; ++i) {
    int parent = model_.bodies[i].parent;
    a[i] = a[parent] + cross_motion(v[i], S[i - 1] * u[6 + i - 1]);
  }
  std::array<Vec6, kNumBodies> f;
  for (int i = 0; i < kNumBodies; ++i)
    f[i] = I6[i] * a[i] + cross_force(v[i], I6[i] * v[i]);
  for (int i = kNumBodies - 1; i >= 1; --i) f[model_.bodies[i].parent] += f[i];

  VecDof bias;
  bias.head<6>() = f[0];
  for (int j = 0; j < kNumJoints; ++j) bias[6 + j] = S[j].dot(f[j + 1]);

  // Mass matrix by composite rigid bodies, plus rotor armature.
  std::array<Mat6, kNumBodies> Ic = I6;
  for (int i = kNumBodies - 1; i >= 1; --i) Ic[model_.bodies[i].parent] += Ic[i];
  MatDof M = MatDof::Zero();
  M.topLeftCorner<6, 6>() = Ic[0];
  for (int j = 0; j < kNumJoints; ++j) {
    int body = j + 1;
    Vec6 F = Ic[body] * S[j];
    M(6 + j, 6 + j) = S[j].dot(F) + cfg_.joint_armature;
    int b = model_.bodies[body].parent;
    while (b > 0) {
      int ja = b - 1;
      M(6 + j, 6 + ja) = M(6 + ja, 6 + j) = S[ja].dot(F);
      b = model_.bodies[b].parent;
    }
    M.block<6, 1>(0, 6 + j) = F;
    M.block<1, 6>(6 + j, 0) = F.transpose();
  }

  // Actuation: PD torque recomputed each substep, plus viscous motor
  // friction and soft joint-limit springs.
  Vec12 tau = pd_torque(ctrl_.kp, ctrl_.kd, q_target, s.q, s.qd, ctrl_.motor_strength,
                        model_.torque_limit);
  tau_out += tau;
  VecDof gen_force = VecDof::Zero();
  for (int j = 0; j < kNumJoints; ++j) {
    double passive = -ctrl_.motor_friction * s.qd[j];
    if (s.q[j] > model_.q_upper[j])
      passive += -cfg_.limit_stiffness * (s.q[j] - model_.q_upper[j]) - cfg_.limit_damping * s.qd[j];
    else if (s.q[j] < model_.q_lower[j])
      passive += -cfg_.limit_stiffness * (s.q[j] - model_.q_lower[j]) - cfg_.limit_damping * s.qd[j];
    gen_force[6 + j] = tau[j] + passive;
  }

  Eigen::LDLT<MatDof> ldlt(M);
  VecDof u_new = u + dt * ldlt.solve(gen_force - bias);

  // Contact impulses: per-contact penalty-spring targets solved by a few
  // Gauss-Seidel sweeps with no-bounce ceilings and an anti-tunnel floor.
  std::vector<Contact> contacts;
  detect_contacts(kin, u_new, contacts);
  for (Contact& c : contacts) {
    c.Jn.setZero();
    c.Jt1.setZero();
    c.Jt2.setZero();
    auto fill = [&](VecDof& J, const Vec3& d) {
      J.segment<3>(0) = c.point.cross(d);
      J.segment<3>(3) = d;
      int body = model_.geoms[c.geom].body;
      int b = body;
      while (b > 0) {
        int j = b - 1;
        J[6 + j] = d.dot(kin.axis[j].cross(c.point - kin.anchor[j]));
        b = model_.bodies[b].parent;
      }
    };
    fill(c.Jn, c.n);
    fill(c.Jt1, c.t1);
    fill(c.Jt2, c.t2);
    c.MiJn = ldlt.solve(c.Jn);
    c.MiJt1 = ldlt.solve(c.Jt1);
    c.MiJt2 = ldlt.solve(c.Jt2);
    c.wn = std::max(c.Jn.dot(c.MiJn), 1e-9);
    c.wt1 = std::max(c.Jt1.dot(c.MiJt1), 1e-9);
    c.wt2 = std::max(c.Jt2.dot(c.MiJt2), 1e-9);
  }

  const double mu = ctrl_.ground_friction;
  // Implicit spring-damper: lam = dt*(k*d_end - c*vn_end) solved against the
  // contact's effective mass, so arbitrary stiffness stays stable. A rigid
  // velocity-level backstop at max_penetration prevents tunneling through
  // stiff landings that the softened spring cannot hold.
  const double gamma =
      dt * (cfg_.contact_stiffness * dt + cfg_.contact_damping);
  for (int iter = 0; iter < cfg_.contact_iterations; ++iter) {
    for (Contact& c : contacts) {
      double vn = c.Jn.dot(u_new);
      if (c.gap < 0.0) {
        double depth = -c.gap;
        double delta = (dt * cfg_.contact_stiffness * depth - gamma * vn - c.lam_n) /
                       (1.0 + gamma * c.wn);
        double lam_new = std::max(0.0, c.lam_n + delta);
        u_new += c.MiJn * (lam_new - c.lam_n);
        vn += c.wn * (lam_new - c.lam_n);
        c.lam_n = lam_new;
      }
      // Backstop: arrest approach so the substep cannot end deeper than
      // max_penetration; never injects separating velocity.
      double v_req = std::min((-cfg_.max_penetration - c.gap) / dt, 0.0);
      if (vn < v_req) {
        double dlam = (v_req - vn) / c.wn;
        c.lam_n += dlam;
        u_new += c.MiJn * dlam;
      }

      if (c.lam_n > 0.0 && mu > 0.0) {
        double vt1 = c.Jt1.dot(u_new);
        double vt2 = c.Jt2.dot(u_new);
        double nt1 = c.lam_t1 - vt1 / c.wt1;
        double nt2 = c.lam_t2 - vt2 / c.wt2;
        double lim = mu * c.lam_n;
        double norm = std::hypot(nt1, nt2);
        if (norm > lim) {
          nt1 *= lim / norm;
          nt2 *= lim / norm;
        }
        u_new += c.MiJt1 * (nt1 - c.lam_t1) + c.MiJt2 * (nt2 - c.lam_t2);
        c.lam_t1 = nt1;
        c.lam_t2 = nt2;
      }
    }
  }

  // Report contribution of this substep.
  for (const Contact& c : contacts) {
    if (c.lam_n <= 1e-12) continue;
    const GeomDef& g = model_.geoms[c.geom];
    Vec3 force = (c.lam_n * c.n + c.lam_t1 * c.t1 + c.lam_t2 * c.t2) / dt;
    switch (g.kind) {
      case GeomKind::TrunkPoint:
        report.component_contact[0] = true;
        break;
      case GeomKind::HipSphere:
        report.component_contact[1 + g.leg] = true;
        break;
      case GeomKind::ThighSphere:
        report.component_contact[5 + g.leg] = true;
        break;
      case GeomKind::CalfSphere:
        report.component_contact[9 + g.leg] = true;
        report.knee_force_xy[g.leg] += force.head<2>() / cfg_.substeps;
        break;
      case GeomKind::FootSphere:
        report.foot_contact[g.leg] = true;
        report.foot_normal_force[g.leg] += c.lam_n / dt / cfg_.substeps;
        break;
    }
  }

  // Semi-implicit Euler: positions advance with the updated velocities.
  Vec3 omega = u_new.segment<3>(0);
  Vec3 v_base = u_new.segment<3>(3) + omega.cross(s.base_pos);
  s.base_pos += dt * v_base;
  double w = omega.norm();
  if (w > 1e-12) {
    s.base_quat = Eigen::Quaterniond(Eigen::AngleAxisd(w * dt, omega / w)) * s.base_quat;
  }
  s.base_quat.normalize();
  s.q += dt * u_new.segment<12>(6);
  s.base_ang_vel = omega;
  s.base_lin_vel = v_base;
  s.qd = u_new.segment<12>(6);
  s.time += dt;

  return s.finite();
}

StepResult QuadrupedSim::step_control(const Vec12& q_target) {
  StepResult result;
  Vec12 tau_sum = Vec12::Zero();
  for (int k = 0; k < cfg_.substeps; ++k) {
    if (!substep(q_target, tau_sum, result.contacts)) {
      result.fault = true;
      break;
    }
  }
  result.applied_torque = tau_sum / cfg_.substeps;
  return result;
}

ContactReport QuadrupedSim::contact_report() const {
  ContactReport report;
  Kinematics kin;
  forward_kinematics(state_, kin);
  VecDof u = VecDof::Zero();
  std::vector<Contact> contacts;
  detect_contacts(kin, u, contacts);
  for (const Contact& c : contacts) {
    if (c.gap > 0.0) continue;
    const GeomDef& g = model_.geoms[c.geom];
    // Instantaneous penalty-spring normal force from the current state.
    Vec3 omega = state_.base_ang_vel;
    Vec3 v_o = state_.base_lin_vel - omega.cross(state_.base_pos);
    VecDof uu;
    uu.segment<3>(0) = omega;
    uu.segment<3>(3) = v_o;
    uu.segment<12>(6) = state_.qd;
    VecDof Jn = VecDof::Zero();
    Jn.segment<3>(0) = c.point.cross(c.n);
    Jn.segment<3>(3) = c.n;
    int b = g.body;
    while (b > 0) {
      int j = b - 1;
      Jn[6 + j] = c.n.dot(kin.axis[j].cross(c.point - kin.anchor[j]));
      b = model_.bodies[b].parent;
    }
    double vn = Jn.dot(uu);
    double depth = -c.gap;
    double fn =
        std::max(0.0, cfg_.contact_stiffness * depth - cfg_.contact_damping * vn);
    Vec3 force = fn * c.n;
    switch (g.kind) {
      case GeomKind::TrunkPoint:
        report.component_contact[0] = true;
        break;
      case GeomKind::HipSphere:
        report.component_contact[1 + g.leg] = true;
        break;
      case GeomKind::ThighSphere:
        report.component_contact[5 + g.leg] = true;
        break;
      case GeomKind::CalfSphere:
        report.component_contact[9 + g.leg] = true;
        report.knee_force_xy[g.leg] += force.head<2>();
        break;
      case GeomKind::FootSphere:
        report.foot_contact[g.leg] = true;
        report.foot_normal_force[g.leg] += fn;
        break;
    }
  }
  return report;
}

SimState QuadrupedSim::reset_supine(Rng& rng) {
  SimState s;
  double yaw = rng.uniform(-M_PI, M_PI);
  double pitch = rng.uniform(-0.3, 0.3);
  double roll = M_PI + rng.uniform(-0.3, 0.3);
  s.base_quat = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                                   Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                                   Eigen::AngleAxisd(roll, Vec3::UnitX()));
  s.base_pos = Vec3(rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), 0.0);
  for (int j = 0; j < kNumJoints; ++j)
    s.q[j] = rng.uniform(model_.q_lower[j], model_.q_upper[j]);

  // Place the lowest collision point a small clearance above the highest
  // terrain under the footprint, then settle while holding the sampled pose.
  state_ = s;
  Kinematics kin;
  forward_kinematics(state_, kin);
  double lowest = 1e9;
  for (const GeomDef& g : model_.geoms) {
    Vec3 p = kin.pos[g.body] + kin.R[g.body] * g.offset;
    lowest = std::min(lowest, p.z() - g.radius);
  }
  // Conservative footprint: hip anchor offset plus one fully extended leg.
  double calf_len = 0.0;
  for (const GeomDef& g : model_.geoms)
    if (g.kind == GeomKind::FootSphere) calf_len = std::max(calf_len, g.offset.norm() + g.radius);
  double reach = model_.bodies[1].joint_anchor.norm() + model_.bodies[2].joint_anchor.norm() +
                 model_.bodies[3].joint_anchor.norm() + calf_len;
  double ground = terrain_->max_height_in(s.base_pos.x() - reach, s.base_pos.y() - reach,
                                          s.base_pos.x() + reach, s.base_pos.y() + reach);
  s.base_pos.z() += ground + 0.05 - lowest;
  state_ = s;

  const Vec12 hold = s.q;
  int settle_steps = static_cast<int>(cfg_.settle_time / cfg_.dt_physics());
  Vec12 tau_unused = Vec12::Zero();
  ContactReport rep_unused;
  for (int k = 0; k < settle_steps; ++k) {
    if (!substep(hold, tau_unused, rep_unused)) break;
  }
  double pen = max_penetration();
  if (pen > 0.0005) state_.base_pos.z() += pen - 0.0005;
  state_.time = 0.0;
  return state_;
}

double QuadrupedSim::mechanical_energy() const {
  Kinematics kin;
  forward_kinematics(state_, kin);
  VecDof u;
  u.segment<3>(0) = state_.base_ang_vel;
  u.segment<3>(3) = state_.base_lin_vel - state_.base_ang_vel.cross(state_.base_pos);
  u.segment<12>(6) = state_.qd;

  std::array<Vec6, kNumJoints> S;
  std::array<Vec6, kNumBodies> v;
  for (int j = 0; j < kNumJoints; ++j) S[j] = joint_subspace(kin.axis[j], kin.anchor[j]);
  v[0] = u.head<6>();
  for (int i = 1; i < kNumBodies; ++i)
    v[i] = v[model_.bodies[i].parent] + S[i - 1] * u[6 + i - 1];

  double ke = 0.0, pe = 0.0;
  for (int i = 0; i < kNumBodies; ++i) {
    Mat6 I6 = spatial_inertia(model_.bodies[i].mass, kin.com[i], kin.Icom[i]);
    ke += 0.5 * v[i].dot(I6 * v[i]);
    pe += model_.bodies[i].mass * cfg_.gravity * kin.com[i].z();
  }
  for (int j = 0; j < kNumJoints; ++j) ke += 0.5 * cfg_.joint_armature * u[6 + j] * u[6 + j];
  return ke + pe;
}

double QuadrupedSim::max_penetration() const {
  Kinematics kin;
  forward_kinematics(state_, kin);
  double pen = 0.0;
  for (const GeomDef& g : model_.geoms) {
    Vec3 center = kin.pos[g.body] + kin.R[g.body] * g.offset;
    double h = terrain_->height_at(center.x(), center.y());
    Vec3 n = terrain_->normal_at(center.x(), center.y());
    double gap = (center.z() - h) * n.z() - g.radius;
    pen = std::max(pen, -gap);
  }
  return pen;
}

void QuadrupedSim::skeleton_points(Eigen::Vector3d& base, std::array<Eigen::Vector3d, 4>& hips,
                                   std::array<Eigen::Vector3d, 4>& knees,
                                   std::array<Eigen::Vector3d, 4>& feet) const {
  Kinematics kin;
  forward_kinematics(state_, kin);
  base = kin.pos[0];
  for (int leg = 0; leg < 4; ++leg) {
    hips[leg] = kin.anchor[3 * leg + 1];  // thigh joint
    knees[leg] = kin.anchor[3 * leg + 2];
    const GeomDef* foot = nullptr;
    for (const GeomDef& g : model_.geoms)
      if (g.kind == GeomKind::FootSphere && g.leg == leg) foot = &g;
    feet[leg] = kin.pos[foot->body] + kin.R[foot->body] * foot->offset;
  }
}

}  // namespace frlab
