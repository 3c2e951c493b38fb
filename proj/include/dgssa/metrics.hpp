#pragma once

// Pixel-level segmentation metrics, exact rank AUC and error overlays.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/image.hpp"

namespace dgssa::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt, const BinaryMask* roi = nullptr) {
  require_same_shape(pred, gt, "confusion: prediction vs ground truth");
  if (roi) require_same_shape(pred, *roi, "confusion: prediction vs ROI");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (roi && !(*roi)[i]) continue;
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

/// Empty optionals mark metrics whose denominator is zero.
struct BasicMetrics {
  std::optional<double> dsc;
  std::optional<double> acc;
  std::optional<double> sp;
  std::optional<double> recall;
  std::optional<double> precision;
};

inline BasicMetrics basic_metrics(const ConfusionCounts& c) {
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (den == 0.0) return std::nullopt;
    return num / den;
  };
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double tn = static_cast<double>(c.tn);
  BasicMetrics m;
  const double dsc_den = 2.0 * tp + fp + fn;
  m.dsc = dsc_den == 0.0 ? 1.0 : 2.0 * tp / dsc_den;  // both empty counts as perfect overlap
  m.acc = ratio(tp + tn, static_cast<double>(c.total()));
  m.sp = ratio(tn, tn + fp);
  m.recall = ratio(tp, tp + fn);
  m.precision = ratio(tp, tp + fp);
  return m;
}

/// Exact area under the ROC curve from the Mann-Whitney rank statistic, with
/// midranks for tied scores.
inline double auc_from_scores(std::vector<std::pair<double, bool>> samples) {
  std::size_t n_pos = 0;
  for (const auto& s : samples) n_pos += s.second ? 1 : 0;
  const std::size_t n_neg = samples.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::SingleClass, "AUC needs both positive and negative samples");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    std::size_t pos_in_run = 0;
    while (j < samples.size() && samples[j].first == samples[i].first) {
      pos_in_run += samples[j].second ? 1 : 0;
      ++j;
    }
    // ranks i+1 .. j share the midrank
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum += midrank * static_cast<double>(pos_in_run);
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

inline double auc_roc(const GrayImage& prob, const BinaryMask& gt, const BinaryMask* roi = nullptr) {
  require_same_shape(prob, gt, "auc_roc: scores vs ground truth");
  if (roi) require_same_shape(prob, *roi, "auc_roc: scores vs ROI");
  std::vector<std::pair<double, bool>> samples;
  samples.reserve(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (roi && !(*roi)[i]) continue;
    samples.emplace_back(prob[i], gt[i] != 0);
  }
  return auc_from_scores(std::move(samples));
}

struct Rgb8 {
  std::uint8_t r, g, b;
};

inline constexpr Rgb8 kTruePositiveColor{144, 238, 144};   // light green
inline constexpr Rgb8 kFalsePositiveColor{240, 128, 128};  // light coral
inline constexpr Rgb8 kFalseNegativeColor{173, 216, 230};  // light blue
inline constexpr Rgb8 kTrueNegativeColor{255, 255, 255};

/// Color-coded TP/FP/FN map on a white background.
inline PixelBuffer error_overlay(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "error_overlay");
  PixelBuffer out{pred.width(), pred.height(), 3, std::vector<std::uint8_t>(pred.size() * 3)};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    const Rgb8 c = p && g ? kTruePositiveColor : p ? kFalsePositiveColor : g ? kFalseNegativeColor : kTrueNegativeColor;
    out.bytes[i * 3] = c.r;
    out.bytes[i * 3 + 1] = c.g;
    out.bytes[i * 3 + 2] = c.b;
  }
  return out;
}

/// Rows of (domain label, feature vector).
struct FeatureTable {
  std::vector<std::string> domains;
  std::vector<std::vector<double>> features;

  void add(std::string domain, std::vector<double> f) {
    if (!features.empty() && f.size() != features.front().size()) {
      throw Error(Errc::DimensionMismatch, "feature vectors must share one dimension");
    }
    domains.push_back(std::move(domain));
    features.push_back(std::move(f));
  }
};

struct InterDistance {
  double mean_distance = 0.0;
  std::size_t domain_count = 0;
  std::size_t pair_count = 0;
  std::map<std::string, std::vector<double>> centers;
};

/// Mean Euclidean distance between per-domain mean vectors over all unordered pairs.
inline InterDistance domain_inter_distance(const FeatureTable& table) {
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < table.features.size(); ++i) {
    auto& [sum, count] = acc[table.domains[i]];
    if (sum.empty()) sum.assign(table.features[i].size(), 0.0);
    if (sum.size() != table.features[i].size()) {
      throw Error(Errc::DimensionMismatch, "feature vectors must share one dimension");
    }
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += table.features[i][d];
    ++count;
  }
  if (acc.size() < 2) throw Error(Errc::TooFewDomains, "need at least two domains");
  InterDistance out;
  for (auto& [name, entry] : acc) {
    auto& [sum, count] = entry;
    for (double& v : sum) v /= static_cast<double>(count);
    out.centers.emplace(name, sum);
  }
  std::vector<const std::vector<double>*> centers;
  for (const auto& [name, c] : out.centers) centers.push_back(&c);
  double total = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      double sq = 0.0;
      for (std::size_t d = 0; d < centers[i]->size(); ++d) {
        const double diff = (*centers[i])[d] - (*centers[j])[d];
        sq += diff * diff;
      }
      total += std::sqrt(sq);
      ++out.pair_count;
    }
  }
  out.domain_count = centers.size();
  out.mean_distance = total / static_cast<double>(out.pair_count);
  return out;
}

}  // namespace dgssa::metrics
