#pragma once

#include <Eigen/Core>

#include "frlab/config.hpp"
#include "frlab/nn.hpp"
#include "frlab/observation.hpp"

namespace frlab {

/// Loss components of the predictor. Terms are unweighted; total applies
/// the lambda weights.
template <typename S>
struct McpLossTerms {
  S mass_mse = 0;
  S contact_bce = 0;
  S recon_mse = 0;
  S kl = 0;
  S lambda_m = 1, lambda_c = 1, lambda_rec = 1, lambda_kl = S(0.1);

  S total() const {
    return lambda_m * mass_mse + lambda_c * contact_bce + lambda_rec * recon_mse +
           lambda_kl * kl;
  }
};

/// Closed-form pieces, usable standalone. Probabilities are clamped to
/// [1e-7, 1-1e-7] inside the BCE.
template <typename S>
S mass_mse_loss(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& m_hat,
                const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& m) {
  return (m_hat - m).array().square().mean();
}

template <typename S>
S contact_bce_loss(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& c_hat,
                   const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& c) {
  const S eps = S(1e-7);
  auto p = c_hat.array().min(S(1) - eps).max(eps);
  auto bce = -(c.array() * p.log() + (S(1) - c.array()) * (S(1) - p).log());
  // sum over the 13 channels, mean over the batch
  return bce.rowwise().sum().mean();
}

template <typename S>
S recon_mse_loss(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& o_hat,
                 const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& o) {
  return (o_hat - o).array().square().mean();
}

/// KL(q || N(0, I)) summed over latent dims, mean over the batch.
template <typename S>
S gaussian_kl_loss(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& mean,
                   const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& logvar) {
  auto kl = S(0.5) * (mean.array().square() + logvar.array().exp() - S(1) - logvar.array());
  return kl.rowwise().sum().mean();
}

/// Mass-Contact Predictor: an encoder over the 5-frame observation history
/// with linear heads for mass, per-component contact probability and a
/// Gaussian latent, and a decoder predicting the next observation frame.
/// Ablation flags zero the corresponding outputs and drop their losses;
/// output dimensionality never changes.
template <typename S>
class McpNet {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  static constexpr int kHistDim = kHistoryLen * kObsDim;  // 210
  static constexpr int kHeadDim = kMassDim + kContactDim + 2 * kLatentDim;  // 49
  static constexpr int kDecInDim = kMassDim + kContactDim + kLatentDim;     // 33

  McpNet() = default;
  explicit McpNet(const McpConfig& cfg, bool no_mass = false, bool no_col = false,
                  bool no_est = false)
      : no_mass_(no_mass), no_col_(no_col), no_est_(no_est), lambda_m_(cfg.lambda_mass),
        lambda_c_(cfg.lambda_contact), lambda_rec_(cfg.lambda_recon), lambda_kl_(cfg.lambda_kl) {
    std::vector<int> enc_dims{kHistDim};
    for (int h : cfg.encoder_hidden) enc_dims.push_back(h);
    enc_dims.push_back(kHeadDim);
    encoder_ = Mlp<S>(enc_dims);
    std::vector<int> dec_dims{kDecInDim};
    for (int h : cfg.decoder_hidden) dec_dims.push_back(h);
    dec_dims.push_back(kObsDim);
    decoder_ = Mlp<S>(dec_dims);
  }

  void init(Rng& rng) {
    encoder_.init(rng);
    decoder_.init(rng);
  }

  Mlp<S>& encoder() { return encoder_; }
  Mlp<S>& decoder() { return decoder_; }
  const Mlp<S>& encoder() const { return encoder_; }
  const Mlp<S>& decoder() const { return decoder_; }
  bool no_mass() const { return no_mass_; }
  bool no_col() const { return no_col_; }
  bool no_est() const { return no_est_; }

  struct Heads {
    Mat m_hat;     // N x 4
    Mat c_logits;  // N x 13
    Mat c_hat;     // N x 13, sigmoid clamped to (0, 1)
    Mat z_mean;    // N x 16
    Mat z_logvar;  // N x 16
    Mat z;         // N x 16 (sampled when noise is given, mean otherwise)
  };

  /// Batch encode. `noise` (N x 16, standard normal) enables the
  /// reparameterized sample; pass nullptr for mean-only evaluation.
  Heads encode(const Mat& hist, const Mat* noise,
               typename Mlp<S>::Cache* cache = nullptr) const {
    Mat y = encoder_.forward(hist, cache);
    Heads h;
    const int n = static_cast<int>(y.rows());
    h.m_hat = y.middleCols(0, kMassDim);
    h.c_logits = y.middleCols(kMassDim, kContactDim);
    h.c_hat = h.c_logits.unaryExpr([](S v) {
      S p = S(1) / (S(1) + std::exp(-v));
      return std::min(S(1) - S(1e-7), std::max(S(1e-7), p));
    });
    h.z_mean = y.middleCols(kMassDim + kContactDim, kLatentDim);
    h.z_logvar = y.middleCols(kMassDim + kContactDim + kLatentDim, kLatentDim);
    if (noise != nullptr) {
      h.z = h.z_mean.array() + (h.z_logvar.array() / S(2)).exp() * noise->array();
    } else {
      h.z = h.z_mean;
    }
    if (no_mass_) h.m_hat.setZero(n, kMassDim);
    if (no_col_) h.c_hat.setZero(n, kContactDim);
    if (no_est_) h.z.setZero(n, kLatentDim);
    return h;
  }

  Mat decoder_input(const Heads& h) const {
    Mat d(h.m_hat.rows(), kDecInDim);
    d.middleCols(0, kMassDim) = h.m_hat;
    d.middleCols(kMassDim, kContactDim) = h.c_hat;
    d.middleCols(kMassDim + kContactDim, kLatentDim) = h.z;
    return d;
  }

  Mat decode(const Mat& dec_in, typename Mlp<S>::Cache* cache = nullptr) const {
    return decoder_.forward(dec_in, cache);
  }

  /// Full forward pass, loss, and parameter gradients for one minibatch.
  /// `recon_mask` (length N, 0/1) drops terminal transitions from the
  /// reconstruction term. Gradients are accumulated into grad_enc/grad_dec.
  McpLossTerms<S> loss_and_grad(const Mat& hist, const Mat& m_target, const Mat& c_target,
                                const Mat& o_next, const Vec& recon_mask, const Mat& noise,
                                Vec& grad_enc, Vec& grad_dec) const {
    const int n = static_cast<int>(hist.rows());
    typename Mlp<S>::Cache enc_cache, dec_cache;
    Heads h = encode(hist, &noise, &enc_cache);

    McpLossTerms<S> terms;
    terms.lambda_m = static_cast<S>(lambda_m_);
    terms.lambda_c = static_cast<S>(lambda_c_);
    terms.lambda_rec = static_cast<S>(lambda_rec_);
    terms.lambda_kl = static_cast<S>(lambda_kl_);

    Mat d_m = Mat::Zero(n, kMassDim);
    Mat d_logits = Mat::Zero(n, kContactDim);
    Mat d_mean = Mat::Zero(n, kLatentDim);
    Mat d_logvar = Mat::Zero(n, kLatentDim);

    if (!no_mass_) {
      terms.mass_mse = mass_mse_loss<S>(h.m_hat, m_target);
      d_m = terms.lambda_m * S(2) / S(n * kMassDim) * (h.m_hat - m_target);
    }
    if (!no_col_) {
      terms.contact_bce = contact_bce_loss<S>(h.c_hat, c_target);
      // d/dlogit of the per-sample summed BCE is sigmoid(logit) - target
      Mat p = h.c_logits.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
      d_logits = terms.lambda_c / S(n) * (p - c_target);
    }
    if (!no_est_) {
      Mat dec_in = decoder_input(h);
      Mat o_hat = decoder_.forward(dec_in, &dec_cache);
      S mask_sum = std::max(recon_mask.sum(), S(1));
      Mat diff = (o_hat - o_next).array().colwise() * recon_mask.array();
      terms.recon_mse = diff.array().square().sum() / (mask_sum * S(kObsDim));
      terms.kl = gaussian_kl_loss<S>(h.z_mean, h.z_logvar);

      Mat d_ohat = terms.lambda_rec * S(2) / (mask_sum * S(kObsDim)) * diff;
      Mat d_decin = decoder_.backward(dec_cache, d_ohat, grad_dec);
      if (!no_mass_) d_m += d_decin.middleCols(0, kMassDim);
      if (!no_col_) {
        Mat dp = d_decin.middleCols(kMassDim, kContactDim);
        d_logits += (dp.array() * h.c_hat.array() * (S(1) - h.c_hat.array())).matrix();
      }
      Mat d_z = d_decin.middleCols(kMassDim + kContactDim, kLatentDim);
      d_mean += d_z;
      d_logvar += (d_z.array() * noise.array() * (h.z_logvar.array() / S(2)).exp() * S(0.5))
                      .matrix();
      d_mean += terms.lambda_kl / S(n) * h.z_mean;
      d_logvar +=
          (terms.lambda_kl / S(2 * n) * (h.z_logvar.array().exp() - S(1))).matrix();
    }

    Mat d_heads(n, kHeadDim);
    d_heads.middleCols(0, kMassDim) = d_m;
    d_heads.middleCols(kMassDim, kContactDim) = d_logits;
    d_heads.middleCols(kMassDim + kContactDim, kLatentDim) = d_mean;
    d_heads.middleCols(kMassDim + kContactDim + kLatentDim, kLatentDim) = d_logvar;
    encoder_.backward(enc_cache, d_heads, grad_enc);
    return terms;
  }

 private:
  Mlp<S> encoder_;
  Mlp<S> decoder_;
  bool no_mass_ = false, no_col_ = false, no_est_ = false;
  double lambda_m_ = 1, lambda_c_ = 1, lambda_rec_ = 1, lambda_kl_ = 0.1;
};

}  // namespace frlab
