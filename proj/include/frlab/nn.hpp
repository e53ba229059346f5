#pragma once

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <vector>

#include "frlab/rng.hpp"

namespace frlab {

/// Fully connected network with ELU hidden activations and a linear output,
/// stored as one flat parameter vector (weights row-major out x in, then
/// bias, per layer). Batches are row-per-sample matrices.
template <typename S>
class Mlp {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Mlp() = default;
  explicit Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    assert(dims_.size() >= 2);
    int n = 0;
    for (size_t l = 0; l + 1 < dims_.size(); ++l) n += dims_[l + 1] * (dims_[l] + 1);
    params_ = Vec::Zero(n);
  }

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
  const std::vector<int>& dims() const { return dims_; }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<Mat> weight(int layer) {
    return Eigen::Map<Mat>(params_.data() + offset(layer), dims_[layer + 1], dims_[layer]);
  }
  Eigen::Map<const Mat> weight(int layer) const {
    return Eigen::Map<const Mat>(params_.data() + offset(layer), dims_[layer + 1], dims_[layer]);
  }
  Eigen::Map<Vec> bias(int layer) {
    return Eigen::Map<Vec>(params_.data() + offset(layer) + dims_[layer + 1] * dims_[layer],
                           dims_[layer + 1]);
  }
  Eigen::Map<const Vec> bias(int layer) const {
    return Eigen::Map<const Vec>(params_.data() + offset(layer) + dims_[layer + 1] * dims_[layer],
                                 dims_[layer + 1]);
  }

  /// Kaiming-uniform weights, zero biases. `output_gain` rescales the last
  /// layer (small values keep initial policies gentle).
  void init(Rng& rng, double output_gain = 1.0) {
    for (int l = 0; l < num_layers(); ++l) {
      auto W = weight(l);
      double bound = std::sqrt(6.0 / dims_[l]);
      if (l == num_layers() - 1) bound *= output_gain;
      for (int i = 0; i < W.rows(); ++i)
        for (int j = 0; j < W.cols(); ++j) W(i, j) = static_cast<S>(rng.uniform(-bound, bound));
      bias(l).setZero();
    }
  }

  struct Cache {
    std::vector<Mat> act;  // act[0] = input, act[l+1] = post-activation of layer l
  };

  /// X is N x input. Returns N x output.
  Mat forward(const Mat& X, Cache* cache = nullptr) const {
    assert(X.cols() == input_dim());
    Mat h = X;
    if (cache) {
      cache->act.clear();
      cache->act.push_back(h);
    }
    for (int l = 0; l < num_layers(); ++l) {
      Mat z = (h * weight(l).transpose()).rowwise() + bias(l).transpose();
      if (l + 1 < num_layers()) {
        h = z.unaryExpr([](S v) { return v > S(0) ? v : std::expm1(v); });
      } else {
        h = std::move(z);
      }
      if (cache) cache->act.push_back(h);
    }
    return h;
  }

  /// Backpropagates dY (N x output), accumulating parameter gradients into
  /// `grad` (same layout as params) and returning dX.
  Mat backward(const Cache& cache, const Mat& dY, Vec& grad) const {
    assert(grad.size() == params_.size());
    Mat delta = dY;
    for (int l = num_layers() - 1; l >= 0; --l) {
      const Mat& x_in = cache.act[l];
      Eigen::Map<Mat> gW(grad.data() + offset(l), dims_[l + 1], dims_[l]);
      Eigen::Map<Vec> gb(grad.data() + offset(l) + dims_[l + 1] * dims_[l], dims_[l + 1]);
      gW += delta.transpose() * x_in;
      gb += delta.colwise().sum().transpose();
      if (l > 0) {
        Mat dX = delta * weight(l);
        // ELU'(z) = 1 for z > 0, else ELU(z) + 1; act stores the post-value.
        const Mat& a = cache.act[l];
        delta = dX.cwiseProduct(
            a.unaryExpr([](S v) { return v > S(0) ? S(1) : v + S(1); }));
      } else {
        return delta * weight(l);
      }
    }
    return Mat();
  }

 private:
  int offset(int layer) const {
    int off = 0;
    for (int l = 0; l < layer; ++l) off += dims_[l + 1] * (dims_[l] + 1);
    return off;
  }

  std::vector<int> dims_;
  Vec params_;
};

/// Adam over a flat parameter vector.
template <typename S>
class Adam {
 public:
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Adam() = default;
  explicit Adam(int n, double lr = 3e-4) : lr_(lr), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  void step(Vec& params, const Vec& grad) {
    t_ += 1;
    m_ = beta1_ * m_ + (1 - beta1_) * grad;
    v_ = beta2_ * v_ + (1 - beta2_) * grad.cwiseProduct(grad);
    S corr1 = S(1) - std::pow(beta1_, S(t_));
    S corr2 = S(1) - std::pow(beta2_, S(t_));
    S alpha = static_cast<S>(lr_) * std::sqrt(corr2) / corr1;
    params -= alpha * (m_.array() / (v_.array().sqrt() + eps_)).matrix();
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long step_count() const { return t_; }
  Vec& moment1() { return m_; }
  Vec& moment2() { return v_; }
  const Vec& moment1() const { return m_; }
  const Vec& moment2() const { return v_; }
  void set_step_count(long t) { t_ = t; }

 private:
  double lr_ = 3e-4;
  S beta1_ = S(0.9), beta2_ = S(0.999), eps_ = S(1e-8);
  long t_ = 0;
  Vec m_, v_;
};

/// Scales grad in place so its global L2 norm is at most max_norm.
template <typename S>
void clip_grad_norm(Eigen::Matrix<S, Eigen::Dynamic, 1>& grad, double max_norm) {
  double n = std::sqrt(static_cast<double>(grad.squaredNorm()));
  if (n > max_norm && n > 0.0) grad *= static_cast<S>(max_norm / n);
}

}  // namespace frlab
