#include "frlab/observation.hpp"

#include <cassert>
#include <cmath>

namespace frlab {

VecXf build_o(const SimState& state, const Vec12& prev_action) {
  VecXf o(kObsDim);
  Eigen::Vector3d omega_base = state.base_quat.conjugate() * state.base_ang_vel;
  Eigen::Vector3d g = state.projected_gravity();
  o.segment<3>(0) = omega_base.cast<float>();
  o.segment<3>(3) = g.cast<float>();
  o.segment<12>(6) = state.q.cast<float>();
  o.segment<12>(18) = state.qd.cast<float>();
  o.segment<12>(30) = prev_action.cast<float>();
  return o;
}

void apply_obs_noise(VecXf& o, Rng& rng, const ObservationConfig& cfg) {
  auto u = [&](double a) { return static_cast<float>(rng.uniform(-a, a)); };
  for (int i = 0; i < 3; ++i) o[i] += u(cfg.noise_ang_vel);
  for (int i = 3; i < 6; ++i) o[i] += u(cfg.noise_gravity);
  for (int i = 6; i < 18; ++i) o[i] += u(cfg.noise_q);
  for (int i = 18; i < 30; ++i) o[i] += u(cfg.noise_qd);
}

VecXf height_scan(const Heightfield& terrain, const SimState& state,
                  const ObservationConfig& cfg) {
  VecXf out(cfg.scan_rows * cfg.scan_cols);
  const auto& q = state.base_quat;
  double yaw = std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                          1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
  double cy = std::cos(yaw), sy = std::sin(yaw);
  int idx = 0;
  for (int r = 0; r < cfg.scan_rows; ++r) {
    double dx = (r - (cfg.scan_rows - 1) / 2.0) * cfg.scan_spacing;
    for (int c = 0; c < cfg.scan_cols; ++c) {
      double dy = (c - (cfg.scan_cols - 1) / 2.0) * cfg.scan_spacing;
      double px = state.base_pos.x() + cy * dx - sy * dy;
      double py = state.base_pos.y() + sy * dx + cy * dy;
      double rel = state.base_pos.z() - terrain.height_at(px, py);
      out[idx++] = static_cast<float>(std::clamp(rel, -cfg.scan_clip, cfg.scan_clip));
    }
  }
  return out;
}

VecXf build_p(const VecXf& o, const Eigen::Vector4f& m_hat, const VecXf& c_hat,
              const VecXf& z_hat) {
  assert(o.size() == kObsDim && c_hat.size() == kContactDim && z_hat.size() == kLatentDim);
  VecXf p(kPolicyDim);
  p.segment(0, kObsDim) = o;
  p.segment(kObsDim, kMassDim) = m_hat;
  p.segment(kObsDim + kMassDim, kContactDim) = c_hat;
  p.segment(kObsDim + kMassDim + kContactDim, kLatentDim) = z_hat;
  return p;
}

VecXf build_s(const VecXf& o, const VecXf& scan, const Eigen::Vector4f& mass,
              const VecXf& k_pd, const Eigen::Vector2f& p_com, const VecXf& contact_flags,
              const Eigen::Vector4f& foot_forces, float friction) {
  assert(o.size() == kObsDim && scan.size() == kScanDim && k_pd.size() == 24 &&
         contact_flags.size() == kContactDim);
  VecXf s(kPrivilegedDim);
  int at = 0;
  s.segment(at, kObsDim) = o;
  at += kObsDim;
  s.segment(at, kScanDim) = scan;
  at += kScanDim;
  s.segment(at, kMassDim) = mass;
  at += kMassDim;
  s.segment(at, 24) = k_pd;
  at += 24;
  s.segment(at, 2) = p_com;
  at += 2;
  s.segment(at, kContactDim) = contact_flags;
  at += kContactDim;
  s.segment(at, 4) = foot_forces;
  at += 4;
  s[at] = friction;
  return s;
}

void ObsHistory::reset(const VecXf& first) {
  for (auto& f : frames_) f = first;
}

void ObsHistory::push(const VecXf& o) {
  for (int i = 0; i + 1 < kHistoryLen; ++i) frames_[i] = frames_[i + 1];
  frames_[kHistoryLen - 1] = o;
}

VecXf ObsHistory::flat() const {
  VecXf out(kHistoryLen * kObsDim);
  for (int i = 0; i < kHistoryLen; ++i) out.segment(i * kObsDim, kObsDim) = frames_[i];
  return out;
}

Normalizer::Normalizer(int dim) : mean_(VecXf::Zero(dim)), var_(VecXf::Ones(dim)) {}

void Normalizer::update(const Eigen::Ref<const Eigen::MatrixXf>& rows) {
  if (frozen_ || rows.rows() == 0) return;
  const float n_b = static_cast<float>(rows.rows());
  VecXf batch_mean = rows.colwise().mean();
  VecXf batch_var =
      ((rows.rowwise() - batch_mean.transpose()).array().square().colwise().sum() / n_b)
          .matrix();
  if (count_ == 0.0f) {
    mean_ = batch_mean;
    var_ = batch_var;
    count_ = n_b;
    return;
  }
  // Chan et al. parallel moment merge.
  float total = count_ + n_b;
  VecXf delta = batch_mean - mean_;
  VecXf m2 = var_ * count_ + batch_var * n_b +
             delta.array().square().matrix() * (count_ * n_b / total);
  mean_ += delta * (n_b / total);
  var_ = m2 / total;
  count_ = total;
}

VecXf Normalizer::normalize(const VecXf& x) const {
  const float eps = 1e-8f;
  return ((x - mean_).array() / (var_.array() + eps).sqrt()).matrix();
}

void Normalizer::set_stats(const VecXf& mean, const VecXf& var, float count) {
  mean_ = mean;
  var_ = var;
  count_ = count;
}

}  // namespace frlab
