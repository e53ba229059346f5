#include "frlab/env.hpp"

#include <cmath>

#include "frlab/policy.hpp"

namespace frlab {

Env::Env(const Config* cfg, uint64_t seed_key, Rng& root_rng)
    : cfg_(cfg), rng_(root_rng.spawn(seed_key)) {}

void Env::start_episode() {
  spec_ = sample_morphology(rng_, cfg_->morphology);
  ctrl_ = sample_control_randomization(rng_, cfg_->morphology);
  q_stand_ = standing_pose(cfg_->policy.q_stand);
  sim_ = std::make_unique<QuadrupedSim>(spec_, ctrl_, cfg_->sim, terrain_, q_stand_);
  sim_->reset_supine(rng_);

  prev_action_.setZero();
  prev_qd_ = sim_->state().qd;
  last_report_ = sim_->contact_report();
  p_init_xy_ = sim_->state().base_pos.head<2>();
  episode_step_ = 0;
  stable_run_ = 0;
  success_ = false;
  time_to_upright_ = -1.0;
  accum_ = EpisodeResult();

  VecXf first = build_o(sim_->state(), prev_action_);
  history_.reset(first);  // placeholder; observe() refreshes with the live normalizer
}

const VecXf& Env::observe(const Normalizer& norm_o, bool with_noise) {
  VecXf o = build_o(sim_->state(), prev_action_);
  if (with_noise && cfg_->observation.noise) apply_obs_noise(o, rng_, cfg_->observation);
  o_raw_ = o;
  o_n_ = norm_o.normalize(o);
  if (episode_step_ == 0) {
    history_.reset(o_n_);
  } else {
    history_.push(o_n_);
  }
  return o_n_;
}

VecXf Env::build_privileged(const VecXf& o_n) const {
  VecXf scan = height_scan(*terrain_, sim_->state(), cfg_->observation);
  Eigen::Vector4f mass = mass_vector(spec_, ctrl_.payload).cast<float>();
  VecXf k_pd(24);
  k_pd.segment<12>(0) = ctrl_.kp.cast<float>();
  k_pd.segment<12>(12) = ctrl_.kd.cast<float>();
  Eigen::Vector2f p_com = ctrl_.com_shift.cast<float>();
  VecXf flags(kContactDim);
  for (int i = 0; i < kContactDim; ++i) flags[i] = last_report_.component_contact[i] ? 1.f : 0.f;
  Eigen::Vector4f forces = last_report_.foot_normal_force.cast<float>();
  return build_s(o_n, scan, mass, k_pd, p_com, flags, forces,
                 static_cast<float>(ctrl_.ground_friction));
}

Eigen::Vector4f Env::mass_target() const {
  return normalize_mass_vector(mass_vector(spec_, ctrl_.payload), cfg_->morphology)
      .cast<float>();
}

VecXf Env::contact_target() const {
  VecXf c(kContactDim);
  for (int i = 0; i < kContactDim; ++i) c[i] = last_report_.component_contact[i] ? 1.f : 0.f;
  return c;
}

double Env::displacement() const {
  return (sim_->state().base_pos.head<2>() - p_init_xy_).norm();
}

bool Env::stable_pose() const {
  const EvalConfig& ec = cfg_->eval;
  const SimState& s = sim_->state();
  Eigen::Vector3d g = s.projected_gravity();
  if (std::abs(g.z() + 1.0) >= ec.upright_gz_tol) return false;
  double terrain_h = terrain_->height_at(s.base_pos.x(), s.base_pos.y());
  if (s.base_pos.z() - terrain_h <= ec.height_fraction * sim_->model().standing_height)
    return false;
  double q_err = (s.q - q_stand_).cwiseAbs().maxCoeff();
  return q_err < ec.posture_tol;
}

Env::StepInfo Env::apply_action(const Eigen::VectorXf& action) {
  StepInfo info;
  Vec12 a = action.cast<double>();
  for (int i = 0; i < 12; ++i)
    a[i] = std::clamp(a[i], -cfg_->policy.action_clip, cfg_->policy.action_clip);
  Vec12 target = compose_targets(a);
  StepResult sr = sim_->step_control(target);
  episode_step_++;
  const double dt = cfg_->sim.control_dt;

  if (sr.fault) {
    info.fault = true;
    info.done = true;
    info.episode_ended = true;
    accum_.terminal_reason = "fault";
    accum_.success = false;
    accum_.displacement = 0.0;
    accum_.steps = episode_step_;
    info.result = accum_;
    return info;
  }
  last_report_ = sr.contacts;

  const SimState& s = sim_->state();
  RewardInputs rin;
  rin.gravity = s.projected_gravity();
  rin.q = s.q;
  rin.qd = s.qd;
  rin.qdd = (s.qd - prev_qd_) / dt;
  rin.tau = sr.applied_torque;
  rin.action = a;
  rin.prev_action = prev_action_;
  rin.q_lower = spec_.joint_limits_lower;
  rin.q_upper = spec_.joint_limits_upper;
  rin.q_stand = q_stand_;
  rin.feet_contact = sr.contacts.foot_contact;
  rin.body_contact_any = sr.contacts.any_body_contact();
  rin.knee_force_xy = sr.contacts.knee_force_xy;
  rin.p_current_xy = s.base_pos.head<2>();
  rin.p_init_xy = p_init_xy_;
  rin.dt = dt;
  info.breakdown = compute_rewards(rin, cfg_->rewards);
  info.reward = static_cast<float>(info.breakdown.total);

  auto terms = info.breakdown.terms();
  for (int i = 0; i < RewardBreakdown::kNumTerms; ++i) accum_.reward_sums[i] += terms[i];
  accum_.total_reward += info.breakdown.total;

  prev_qd_ = s.qd;
  prev_action_ = a;

  // Success: a stable upright pose held for the required time, reached
  // within the time limit, with bounded displacement when it began.
  const EvalConfig& ec = cfg_->eval;
  double now = episode_step_ * dt;
  if (stable_pose()) {
    if (stable_run_ == 0) {
      stable_start_time_ = now;
      stable_start_disp_ = displacement();
    }
    stable_run_++;
    double held = stable_run_ * dt;
    if (!success_ && held >= ec.hold_time && stable_start_time_ <= ec.time_limit &&
        stable_start_disp_ < ec.displacement_limit) {
      success_ = true;
      time_to_upright_ = stable_start_time_;
    }
  } else {
    stable_run_ = 0;
  }

  if (episode_step_ >= cfg_->train.episode_length) {
    info.done = true;
    info.episode_ended = true;
    accum_.success = success_;
    accum_.time_to_upright = time_to_upright_;
    accum_.displacement = displacement();
    accum_.terminal_reason = "timeout";
    accum_.steps = episode_step_;
    info.result = accum_;
  }
  return info;
}

Vec12 Env::compose_targets(const Vec12& a) const {
  return compose_target(a, q_stand_, cfg_->policy.action_scale, cfg_->policy.action_clip,
                        spec_.joint_limits_lower, spec_.joint_limits_upper);
}

namespace {

void push12(std::vector<double>& v, const Vec12& x) {
  for (int i = 0; i < 12; ++i) v.push_back(x[i]);
}
Vec12 pull12(const std::vector<double>& v, size_t& at) {
  Vec12 x;
  for (int i = 0; i < 12; ++i) x[i] = v[at++];
  return x;
}

}  // namespace

void Env::serialize(Checkpoint& ckpt, const std::string& prefix) const {
  std::vector<double> d;
  d.push_back(spec_.trunk_mass);
  d.push_back(spec_.trunk_length);
  d.push_back(spec_.trunk_width);
  d.push_back(spec_.trunk_height);
  d.push_back(spec_.hip_mass);
  d.push_back(spec_.hip_length);
  d.push_back(spec_.thigh_mass);
  d.push_back(spec_.thigh_length);
  d.push_back(spec_.thigh_width);
  d.push_back(spec_.thigh_height);
  d.push_back(spec_.calf_mass);
  d.push_back(spec_.calf_length);
  d.push_back(spec_.calf_width);
  d.push_back(spec_.calf_height);
  push12(d, spec_.joint_limits_lower);
  push12(d, spec_.joint_limits_upper);
  d.push_back(spec_.torque_limit);
  d.push_back(spec_.foot_radius);

  push12(d, ctrl_.kp);
  push12(d, ctrl_.kd);
  push12(d, ctrl_.motor_strength);
  d.push_back(ctrl_.com_shift[0]);
  d.push_back(ctrl_.com_shift[1]);
  d.push_back(ctrl_.payload);
  d.push_back(ctrl_.motor_friction);
  d.push_back(ctrl_.ground_friction);

  const SimState& s = sim_->state();
  for (int i = 0; i < 3; ++i) d.push_back(s.base_pos[i]);
  d.push_back(s.base_quat.w());
  d.push_back(s.base_quat.x());
  d.push_back(s.base_quat.y());
  d.push_back(s.base_quat.z());
  for (int i = 0; i < 3; ++i) d.push_back(s.base_lin_vel[i]);
  for (int i = 0; i < 3; ++i) d.push_back(s.base_ang_vel[i]);
  push12(d, s.q);
  push12(d, s.qd);
  d.push_back(s.time);

  push12(d, prev_action_);
  push12(d, prev_qd_);
  for (int i = 0; i < 13; ++i) d.push_back(last_report_.component_contact[i] ? 1.0 : 0.0);
  for (int i = 0; i < 4; ++i) d.push_back(last_report_.foot_contact[i] ? 1.0 : 0.0);
  for (int i = 0; i < 4; ++i) d.push_back(last_report_.foot_normal_force[i]);
  for (int i = 0; i < 4; ++i) {
    d.push_back(last_report_.knee_force_xy[i][0]);
    d.push_back(last_report_.knee_force_xy[i][1]);
  }
  d.push_back(p_init_xy_[0]);
  d.push_back(p_init_xy_[1]);
  d.push_back(episode_step_);
  d.push_back(stable_run_);
  d.push_back(stable_start_time_);
  d.push_back(stable_start_disp_);
  d.push_back(success_ ? 1.0 : 0.0);
  d.push_back(time_to_upright_);
  for (double r : accum_.reward_sums) d.push_back(r);
  d.push_back(accum_.total_reward);
  ckpt.add_raw_doubles(prefix + ".state", d);
  ckpt.add_raw_u64(prefix + ".rng", {rng_.state(), rng_.inc()});

  Eigen::MatrixXf hist(kHistoryLen, kObsDim);
  for (int i = 0; i < kHistoryLen; ++i) hist.row(i) = history_.frame(i).transpose();
  ckpt.add(prefix + ".history", hist);
  ckpt.add(prefix + ".obs_n", o_n_);
  ckpt.add(prefix + ".obs_raw", o_raw_);
}

void Env::deserialize(const Checkpoint& ckpt, const std::string& prefix) {
  std::vector<double> d = ckpt.get_raw_doubles(prefix + ".state");
  size_t at = 0;
  spec_.trunk_mass = d[at++];
  spec_.trunk_length = d[at++];
  spec_.trunk_width = d[at++];
  spec_.trunk_height = d[at++];
  spec_.hip_mass = d[at++];
  spec_.hip_length = d[at++];
  spec_.thigh_mass = d[at++];
  spec_.thigh_length = d[at++];
  spec_.thigh_width = d[at++];
  spec_.thigh_height = d[at++];
  spec_.calf_mass = d[at++];
  spec_.calf_length = d[at++];
  spec_.calf_width = d[at++];
  spec_.calf_height = d[at++];
  spec_.joint_limits_lower = pull12(d, at);
  spec_.joint_limits_upper = pull12(d, at);
  spec_.torque_limit = d[at++];
  spec_.foot_radius = d[at++];

  ctrl_.kp = pull12(d, at);
  ctrl_.kd = pull12(d, at);
  ctrl_.motor_strength = pull12(d, at);
  ctrl_.com_shift[0] = d[at++];
  ctrl_.com_shift[1] = d[at++];
  ctrl_.payload = d[at++];
  ctrl_.motor_friction = d[at++];
  ctrl_.ground_friction = d[at++];

  SimState s;
  for (int i = 0; i < 3; ++i) s.base_pos[i] = d[at++];
  double qw = d[at++], qx = d[at++], qy = d[at++], qz = d[at++];
  s.base_quat = Eigen::Quaterniond(qw, qx, qy, qz);
  for (int i = 0; i < 3; ++i) s.base_lin_vel[i] = d[at++];
  for (int i = 0; i < 3; ++i) s.base_ang_vel[i] = d[at++];
  s.q = pull12(d, at);
  s.qd = pull12(d, at);
  s.time = d[at++];

  prev_action_ = pull12(d, at);
  prev_qd_ = pull12(d, at);
  for (int i = 0; i < 13; ++i) last_report_.component_contact[i] = d[at++] > 0.5;
  for (int i = 0; i < 4; ++i) last_report_.foot_contact[i] = d[at++] > 0.5;
  for (int i = 0; i < 4; ++i) last_report_.foot_normal_force[i] = d[at++];
  for (int i = 0; i < 4; ++i) {
    last_report_.knee_force_xy[i][0] = d[at++];
    last_report_.knee_force_xy[i][1] = d[at++];
  }
  p_init_xy_[0] = d[at++];
  p_init_xy_[1] = d[at++];
  episode_step_ = static_cast<int>(d[at++]);
  stable_run_ = static_cast<int>(d[at++]);
  stable_start_time_ = d[at++];
  stable_start_disp_ = d[at++];
  success_ = d[at++] > 0.5;
  time_to_upright_ = d[at++];
  accum_ = EpisodeResult();
  for (double& r : accum_.reward_sums) r = d[at++];
  accum_.total_reward = d[at++];

  std::vector<uint64_t> r = ckpt.get_raw_u64(prefix + ".rng");
  rng_.set_raw(r[0], r[1]);

  q_stand_ = standing_pose(cfg_->policy.q_stand);
  sim_ = std::make_unique<QuadrupedSim>(spec_, ctrl_, cfg_->sim, terrain_, q_stand_);
  sim_->set_state(s);

  const Checkpoint::Entry& hist = ckpt.get(prefix + ".history");
  for (int i = 0; i < kHistoryLen; ++i) {
    VecXf f(kObsDim);
    for (int j = 0; j < kObsDim; ++j)
      f[j] = hist.data[static_cast<size_t>(i) + static_cast<size_t>(j) * kHistoryLen];
    if (i == 0) {
      history_.reset(f);
    } else {
      history_.push(f);
    }
  }
  o_n_ = ckpt.get_vector(prefix + ".obs_n");
  o_raw_ = ckpt.get_vector(prefix + ".obs_raw");
}

}  // namespace frlab
