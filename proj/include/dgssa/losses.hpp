#pragma once

// Forward evaluation of the closed-form generator, discriminator and
// segmentation losses over supplied score arrays.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/image.hpp"

namespace dgssa::losses {

/// Scores are clamped to [eps, 1 - eps] before any logarithm.
inline constexpr double kScoreEps = 1e-7;

/// NegativeLogLikelihood: every term is >= 0 and lower is better.
/// AsPrinted: generator adversarial term is +E[log D(G(M))] and the paired
/// fake discriminator term is +E[log(1 - D(G(M_om)))], exactly as the
/// formulas are usually written down.
enum class SignConvention { NegativeLogLikelihood, AsPrinted };

struct LossWeights {
  double l1 = 100.0;
  double adv = 0.2;
  double disc = 0.3;
  double gp = 10.0;
};

inline double clamp_score(double s) { return std::clamp(s, kScoreEps, 1.0 - kScoreEps); }

namespace detail {

inline double mean_of(std::span<const double> v, auto&& f) {
  if (v.empty()) throw Error(Errc::EmptyList, "loss input is empty");
  double sum = 0.0;
  for (double x : v) sum += f(clamp_score(x));
  return sum / static_cast<double>(v.size());
}

}  // namespace detail

/// Mean absolute difference over all elements.
inline double l1_consistency(std::span<const double> generated, std::span<const double> real) {
  if (generated.size() != real.size()) throw Error(Errc::DimensionMismatch, "l1_consistency: sizes differ");
  if (generated.empty()) throw Error(Errc::EmptyList, "l1_consistency: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < generated.size(); ++i) sum += std::fabs(generated[i] - real[i]);
  return sum / static_cast<double>(generated.size());
}

inline double l1_consistency(const RgbImage& generated, const RgbImage& real) {
  require_same_shape(generated, real, "l1_consistency: image dimensions differ");
  return l1_consistency(generated.data(), real.data());
}

/// -E[log D(G(M))] (or +E[log D(G(M))] as printed).
inline double adv_generator(std::span<const double> d_scores,
                            SignConvention sign = SignConvention::NegativeLogLikelihood) {
  const double mean_log = detail::mean_of(d_scores, [](double s) { return std::log(s); });
  return sign == SignConvention::NegativeLogLikelihood ? -mean_log : mean_log;
}

/// lambda_L1 * L1 + lambda_adv * adv_paired + lambda_adv * adv_unpaired.
inline double generator_total(double l1, double adv_paired, double adv_unpaired, const LossWeights& w = {}) {
  return w.l1 * l1 + w.adv * adv_paired + w.adv * adv_unpaired;
}

struct DiscriminatorComponents {
  double real = 0.0;
  double fake_paired = 0.0;
  double fake_unpaired = 0.0;
};

/// real = -E[log D(RI)], fake_* = -E[log(1 - D(fake))].
inline DiscriminatorComponents discriminator_components(std::span<const double> real_scores,
                                                        std::span<const double> fake_paired_scores,
                                                        std::span<const double> fake_unpaired_scores,
                                                        SignConvention sign = SignConvention::NegativeLogLikelihood) {
  auto log_real = [](double s) { return std::log(s); };
  auto log_fake = [](double s) { return std::log1p(-s); };
  DiscriminatorComponents c;
  c.real = -detail::mean_of(real_scores, log_real);
  const double paired = detail::mean_of(fake_paired_scores, log_fake);
  c.fake_paired = sign == SignConvention::NegativeLogLikelihood ? -paired : paired;
  c.fake_unpaired = -detail::mean_of(fake_unpaired_scores, log_fake);
  return c;
}

/// lambda_1 * (real + fake_paired + fake_unpaired) + lambda_GP * (gp_paired + gp_unpaired).
/// Gradient penalties are computed by the caller.
inline double discriminator_total(const DiscriminatorComponents& c, double gp_paired, double gp_unpaired,
                                  const LossWeights& w = {}) {
  return w.disc * (c.real + c.fake_paired + c.fake_unpaired) + w.gp * (gp_paired + gp_unpaired);
}

/// Sum over scales of each score map's mean.
inline double multiscale_aggregate(std::span<const std::vector<double>> score_maps) {
  if (score_maps.empty()) throw Error(Errc::EmptyList, "multiscale_aggregate: no score maps");
  double total = 0.0;
  for (const auto& map : score_maps) {
    if (map.empty()) throw Error(Errc::EmptyList, "multiscale_aggregate: empty score map");
    double sum = 0.0;
    for (double v : map) sum += v;
    total += sum / static_cast<double>(map.size());
  }
  return total;
}

/// -mean(y log p + (1 - y) log(1 - p)), p clamped.
inline double bce_segmentation(std::span<const double> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) throw Error(Errc::DimensionMismatch, "bce_segmentation: sizes differ");
  if (pred.empty()) throw Error(Errc::EmptyList, "bce_segmentation: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = clamp_score(pred[i]);
    sum += gt[i] ? std::log(p) : std::log1p(-p);
  }
  return -sum / static_cast<double>(pred.size());
}

inline double bce_segmentation(const GrayImage& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "bce_segmentation");
  return bce_segmentation(pred.data(), gt.data());
}

/// dL/dp_i = (p_i - y_i) / (p_i (1 - p_i)) / N, evaluated at the clamped score.
inline std::vector<double> bce_gradient(std::span<const double> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) throw Error(Errc::DimensionMismatch, "bce_gradient: sizes differ");
  std::vector<double> g(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = clamp_score(pred[i]);
    const double y = gt[i] ? 1.0 : 0.0;
    g[i] = (p - y) / (p * (1.0 - p)) / n;
  }
  return g;
}

}  // namespace dgssa::losses
