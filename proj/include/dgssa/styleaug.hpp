#pragma once

// PixMix-style photometric mixing with uncertainty perturbation of channel
// statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/image.hpp"
#include "dgssa/random.hpp"

namespace dgssa::style {

enum class PhotoOp { Brightness, Contrast, Gamma, Posterize, Solarize, Equalize };

inline constexpr std::array<std::string_view, 6> kPhotoOpNames = {"brightness", "contrast", "gamma",
                                                                  "posterize",  "solarize", "equalize"};

inline std::string_view to_string(PhotoOp op) { return kPhotoOpNames[static_cast<std::size_t>(op)]; }

inline PhotoOp photo_op_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kPhotoOpNames.size(); ++i) {
    if (kPhotoOpNames[i] == name) return static_cast<PhotoOp>(i);
  }
  throw Error(Errc::UnknownOp, "unknown photometric op '" + std::string(name) + "'");
}

/// Magnitude range an op is sampled from.
struct PhotoOpRange {
  PhotoOp op;
  double lo;
  double hi;
};

inline std::vector<PhotoOpRange> default_catalog() {
  return {{PhotoOp::Brightness, -0.2, 0.2}, {PhotoOp::Contrast, -0.4, 0.4}, {PhotoOp::Gamma, 0.6, 1.6},
          {PhotoOp::Posterize, 3.0, 8.0},   {PhotoOp::Solarize, 0.5, 1.0},  {PhotoOp::Equalize, 0.0, 1.0}};
}

struct StyleConfig {
  int max_rounds = 4;           // K
  double mixing_ratio = 0.5;    // delta
  double perturb_prob = 0.5;    // p
  std::vector<PhotoOpRange> catalog = default_catalog();
  double sigma_floor = 1e-6;
  std::uint64_t seed = 0;
  /// Draw a fresh ratio in [0, mixing_ratio] for every mixing step.
  bool resample_ratio = false;
};

inline void validate(const StyleConfig& cfg) {
  if (cfg.max_rounds < 0) throw Error(Errc::InvalidArgument, "max_rounds must be >= 0");
  if (!(cfg.mixing_ratio >= 0.0 && cfg.mixing_ratio <= 1.0)) throw Error(Errc::InvalidArgument, "mixing ratio outside [0,1]");
  if (!(cfg.perturb_prob >= 0.0 && cfg.perturb_prob <= 1.0)) throw Error(Errc::InvalidArgument, "probability outside [0,1]");
  if (!(cfg.sigma_floor > 0.0)) throw Error(Errc::InvalidArgument, "sigma_floor must be > 0");
  if (cfg.catalog.empty()) throw Error(Errc::InvalidArgument, "photometric catalog is empty");
}

namespace detail {

inline void equalize_channel(std::span<double> ch, double weight) {
  if (ch.empty()) return;
  std::array<std::size_t, 256> hist{};
  for (double v : ch) hist[to_byte(v)] += 1;
  std::array<std::size_t, 256> cdf{};
  std::size_t run = 0;
  for (std::size_t i = 0; i < 256; ++i) cdf[i] = (run += hist[i]);
  std::size_t cdf_min = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    if (hist[i]) {
      cdf_min = cdf[i];
      break;
    }
  }
  const std::size_t n = ch.size();
  if (n == cdf_min) return;  // constant channel
  for (double& v : ch) {
    const double eq = static_cast<double>(cdf[to_byte(v)] - cdf_min) / static_cast<double>(n - cdf_min);
    v = (1.0 - weight) * v + weight * eq;
  }
}

}  // namespace detail

/// Applies one photometric op. Magnitude meaning per op:
/// brightness = additive offset, contrast = relative gain around the gray mean
/// (0 = identity), gamma = exponent, posterize = bits kept, solarize =
/// threshold (values strictly above are inverted), equalize = blend weight
/// toward the histogram-equalized image.
inline RgbImage photoaug(const RgbImage& img, PhotoOp op, double magnitude) {
  RgbImage out = img;
  auto data = out.data();
  switch (op) {
    case PhotoOp::Brightness:
      for (double& v : data) v += magnitude;
      break;
    case PhotoOp::Contrast: {
      double mean = 0.0;
      for (double v : data) mean += v;
      mean = data.empty() ? 0.0 : mean / static_cast<double>(data.size());
      for (double& v : data) v = mean + (v - mean) * (1.0 + magnitude);
      break;
    }
    case PhotoOp::Gamma:
      if (!(magnitude > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be > 0");
      for (double& v : data) v = std::pow(clamp01(v), magnitude);
      break;
    case PhotoOp::Posterize: {
      const int bits = std::clamp(static_cast<int>(std::lround(magnitude)), 1, 8);
      const auto keep = static_cast<std::uint8_t>(0xFFu << (8 - bits));
      for (double& v : data) v = static_cast<double>(to_byte(v) & keep) / 255.0;
      break;
    }
    case PhotoOp::Solarize:
      for (double& v : data) {
        if (v > magnitude) v = 1.0 - v;
      }
      break;
    case PhotoOp::Equalize: {
      const double w = clamp01(magnitude);
      for (int c = 0; c < RgbImage::kChannels; ++c) detail::equalize_channel(out.channel(c), w);
      break;
    }
    default:
      throw Error(Errc::UnknownOp, "photometric op id out of range");
  }
  for (double& v : data) v = clamp01(v);
  return out;
}

inline RgbImage photoaug(const RgbImage& img, std::string_view op, double magnitude) {
  return photoaug(img, photo_op_from_string(op), magnitude);
}

/// Draws an op uniformly from the catalog and a magnitude uniformly from its range.
inline RgbImage random_photoaug(const RgbImage& img, std::span<const PhotoOpRange> catalog, Rng& rng) {
  if (catalog.empty()) throw Error(Errc::InvalidArgument, "photometric catalog is empty");
  const auto& entry = catalog[rng.below(catalog.size())];
  return photoaug(img, entry.op, rng.uniform(entry.lo, entry.hi));
}

struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
};

/// Population mean and standard deviation per channel (divide by H*W).
inline ChannelStats channel_stats(const RgbImage& img) {
  ChannelStats s;
  const auto n = static_cast<double>(img.plane_size());
  if (n == 0) return s;
  for (int c = 0; c < 3; ++c) {
    const auto ch = img.channel(c);
    double sum = 0.0;
    for (double v : ch) sum += v;
    const double mu = sum / n;
    double sq = 0.0;
    for (double v : ch) sq += (v - mu) * (v - mu);
    s.mean[c] = mu;
    s.stddev[c] = std::sqrt(sq / n);
  }
  return s;
}

using ChannelNoise = std::array<double, 3>;

/// Re-normalizes each channel to perturbed statistics:
///   beta = mu + eps1*mu, gamma = sigma + eps2*sigma,
///   out  = (x - mu) / max(sigma, floor) * gamma + beta, clamped to [0, 1].
/// Evaluated as x + (gamma/sigma' - 1)(x - mu) + eps1*mu so zero noise is an exact identity.
inline RgbImage uncertainty_perturb(const RgbImage& img, const ChannelNoise& eps1, const ChannelNoise& eps2,
                                    double sigma_floor = 1e-6) {
  const ChannelStats st = channel_stats(img);
  RgbImage out = img;
  for (int c = 0; c < 3; ++c) {
    const double mu = st.mean[c];
    const double sigma = st.stddev[c];
    const double gamma = sigma + eps2[c] * sigma;
    const double gain_minus_one = gamma / std::max(sigma, sigma_floor) - 1.0;
    const double shift = eps1[c] * mu;
    if (eps1[c] == 0.0 && eps2[c] == 0.0) {
      // sigma below the floor would otherwise pull pixels onto the rounded mean
      for (double& v : out.channel(c)) v = clamp01(v);
      continue;
    }
    for (double& v : out.channel(c)) v = clamp01(v + gain_minus_one * (v - mu) + shift);
  }
  return out;
}

enum class MixKind { Add, Multiply };

/// add: (1-delta)*a + delta*b; multiply: a^(1-delta) * b^delta (0^0 = 1).
inline RgbImage mix(const RgbImage& a, const RgbImage& b, double delta, MixKind kind) {
  require_same_shape(a, b, "mix: image dimensions differ");
  if (delta == 0.0) return a;
  if (delta == 1.0) return b;
  RgbImage out(a.width(), a.height());
  const auto pa = a.data();
  const auto pb = b.data();
  auto po = out.data();
  for (std::size_t i = 0; i < po.size(); ++i) {
    const double v = kind == MixKind::Add ? (1.0 - delta) * pa[i] + delta * pb[i]
                                          : std::pow(pa[i], 1.0 - delta) * std::pow(pb[i], delta);
    po[i] = clamp01(v);
  }
  return out;
}

struct MixStep {
  bool from_mixer = false;
  std::size_t mixer_index = 0;
  MixKind kind = MixKind::Add;
  bool perturbed = false;
  double ratio = 0.0;
};

struct PixMixTrace {
  bool initial_augmented = false;
  int rounds = 0;
  std::vector<MixStep> steps;
};

struct PixMixResult {
  RgbImage image;
  PixMixTrace trace;
};

/// Start from x or photoaug(x), then for T ~ U{0..K} rounds mix in either
/// photoaug(x) or a random mixer, optionally after uncertainty perturbation.
inline PixMixResult pixmix_traced(const RgbImage& x, std::span<const RgbImage> mixers, const StyleConfig& cfg) {
  validate(cfg);
  if (mixers.empty()) throw Error(Errc::NoMixers, "pixmix needs at least one mixing image");
  for (const auto& z : mixers) require_same_shape(x, z, "pixmix: mixer dimensions differ from input");

  Rng rng(cfg.seed);
  PixMixResult r;
  r.trace.initial_augmented = rng.coin();
  r.image = r.trace.initial_augmented ? random_photoaug(x, cfg.catalog, rng) : x;
  r.trace.rounds = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_rounds) + 1));

  for (int k = 0; k < r.trace.rounds; ++k) {
    MixStep step;
    step.from_mixer = rng.coin();
    RgbImage x_mix;
    if (step.from_mixer) {
      step.mixer_index = static_cast<std::size_t>(rng.below(mixers.size()));
      x_mix = mixers[step.mixer_index];
    } else {
      x_mix = random_photoaug(x, cfg.catalog, rng);
    }
    step.kind = rng.coin() ? MixKind::Add : MixKind::Multiply;
    step.perturbed = rng.uniform() < cfg.perturb_prob;
    if (step.perturbed) {
      ChannelNoise eps1{}, eps2{};
      for (int c = 0; c < 3; ++c) {
        eps1[c] = rng.normal();
        eps2[c] = rng.normal();
      }
      x_mix = uncertainty_perturb(x_mix, eps1, eps2, cfg.sigma_floor);
    }
    step.ratio = cfg.resample_ratio ? rng.uniform(0.0, cfg.mixing_ratio) : cfg.mixing_ratio;
    r.image = mix(r.image, x_mix, step.ratio, step.kind);
    r.trace.steps.push_back(step);
  }
  return r;
}

inline RgbImage pixmix(const RgbImage& x, std::span<const RgbImage> mixers, const StyleConfig& cfg) {
  return pixmix_traced(x, mixers, cfg).image;
}

}  // namespace dgssa::style
