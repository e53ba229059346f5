#pragma once

#include <Eigen/Core>

#include "frlab/config.hpp"
#include "frlab/sim.hpp"

namespace frlab {

inline constexpr int kObsDim = 42;
inline constexpr int kHistoryLen = 5;
inline constexpr int kMassDim = 4;
inline constexpr int kContactDim = 13;
inline constexpr int kLatentDim = 16;
inline constexpr int kPolicyDim = kObsDim + kMassDim + kContactDim + kLatentDim;  // 75
inline constexpr int kScanDim = 187;
inline constexpr int kPrivilegedDim =
    kObsDim + kScanDim + kMassDim + 24 + 2 + kContactDim + 4 + 1;  // 277

using VecXf = Eigen::VectorXf;

/// Proprioceptive observation [omega(3), g(3), q(12), qd(12), a_prev(12)],
/// with angular velocity and gravity expressed in the base frame.
VecXf build_o(const SimState& state, const Vec12& prev_action);

/// Training-time sensor noise, uniform per channel; the previous action is
/// left untouched.
void apply_obs_noise(VecXf& o, Rng& rng, const ObservationConfig& cfg);

/// 17x11 height scan in the yaw-aligned base frame, 0.1 m spacing. Entries
/// are base height minus terrain height, clipped symmetrically.
VecXf height_scan(const Heightfield& terrain, const SimState& state,
                  const ObservationConfig& cfg);

VecXf build_p(const VecXf& o, const Eigen::Vector4f& m_hat, const VecXf& c_hat,
              const VecXf& z_hat);

VecXf build_s(const VecXf& o, const VecXf& scan, const Eigen::Vector4f& mass,
              const VecXf& k_pd, const Eigen::Vector2f& p_com, const VecXf& contact_flags,
              const Eigen::Vector4f& foot_forces, float friction);

/// Fixed-length FIFO of observations; a fresh episode is padded with copies
/// of the first frame.
class ObsHistory {
 public:
  ObsHistory() : frames_(kHistoryLen, VecXf::Zero(kObsDim)) {}
  void reset(const VecXf& first);
  void push(const VecXf& o);
  /// Rows in time order, oldest first, flattened to 210 entries.
  VecXf flat() const;
  const VecXf& frame(int i) const { return frames_[i]; }  // 0 = oldest

 private:
  std::vector<VecXf> frames_;
};

/// Per-channel running mean/variance with z-score normalization. Updates are
/// batched by the training loop; rollouts read a frozen snapshot.
class Normalizer {
 public:
  explicit Normalizer(int dim);

  void update(const Eigen::Ref<const Eigen::MatrixXf>& rows);  // one row per sample
  VecXf normalize(const VecXf& x) const;

  void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  float count() const { return count_; }
  const VecXf& mean() const { return mean_; }
  const VecXf& var() const { return var_; }
  void set_stats(const VecXf& mean, const VecXf& var, float count);

 private:
  VecXf mean_;
  VecXf var_;
  float count_ = 0.0f;
  bool frozen_ = false;
};

}  // namespace frlab
