#pragma once

// Centerline extraction, local radius estimation and the thin/thick vessel
// partition used for width-stratified Dice scores.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/image.hpp"

namespace dgssa::metrics {

namespace detail {

inline constexpr double kFar = 1e20;

// Felzenszwalb-Huttenlocher lower envelope of parabolas, one line at a time.
inline void squared_edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  if (n == 0) return;
  int k = 0;
  v[0] = 0;
  z[0] = -kFar * 10;
  z[1] = kFar * 10;
  for (int q = 1; q < n; ++q) {
    auto intersect = [&](int p) {
      return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * q - 2.0 * p);
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar * 10;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = static_cast<double>(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Squared Euclidean distance from every pixel center to the nearest seed
/// pixel center. Pixels are >= 1e20 when there is no seed at all.
inline Grid<double> squared_distance_to_seeds(const BinaryMask& seeds) {
  const int w = seeds.width();
  const int h = seeds.height();
  Grid<double> out(w, h, 0.0);
  for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = seeds[i] ? 0.0 : detail::kFar;
  const int n = std::max(w, h);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n) + 1);
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int x = 0; x < w; ++x) {
    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) f[y] = out(x, y);
    detail::squared_edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) out(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) f[x] = out(x, y);
    detail::squared_edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) out(x, y) = d[x];
  }
  return out;
}

/// Exact Euclidean distance transform: distance from each foreground pixel to
/// the nearest background pixel, where the area outside the canvas counts as
/// background. Background pixels map to 0.
inline GrayImage radius_map(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  BinaryMask padded(w + 2, h + 2, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) padded(x + 1, y + 1) = m(x, y) ? 0 : 1;
  }
  const Grid<double> sq = squared_distance_to_seeds(padded);
  GrayImage out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (m(x, y)) out(x, y) = std::sqrt(sq(x + 1, y + 1));
    }
  }
  return out;
}

namespace detail {

// Neighbors P2..P9 clockwise from north.
inline std::array<int, 8> ring(const BinaryMask& m, int x, int y) {
  static constexpr int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  std::array<int, 8> p{};
  for (int i = 0; i < 8; ++i) {
    const int nx = x + dx[i];
    const int ny = y + dy[i];
    p[i] = m.contains(nx, ny) && m(nx, ny) ? 1 : 0;
  }
  return p;
}

inline bool zhang_suen_removable(const BinaryMask& m, int x, int y, int subiteration) {
  const auto p = ring(m, x, y);
  const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
  if (b < 2 || b > 6) return false;
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1) ? 1 : 0;
  if (a != 1) return false;
  const int n = p[0], e = p[2], s = p[4], w = p[6];
  if (subiteration == 0) return n * e * s == 0 && e * s * w == 0;
  return n * e * w == 0 && n * s * w == 0;
}

}  // namespace detail

/// Zhang-Suen thinning. Candidates of each sub-iteration are found on the
/// sub-iteration's input, then deleted in row-major order only if they are
/// still removable, so no component can vanish or split (plain parallel
/// deletion erases 2x2 blocks and two-pixel diagonals).
inline BinaryMask skeletonize(const BinaryMask& m) {
  BinaryMask img = m;
  std::vector<std::size_t> fg;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (img[i]) fg.push_back(i);
  }
  const auto w = static_cast<std::size_t>(img.width());
  std::vector<std::size_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      candidates.clear();
      for (std::size_t i : fg) {
        if (detail::zhang_suen_removable(img, static_cast<int>(i % w), static_cast<int>(i / w), sub)) {
          candidates.push_back(i);
        }
      }
      for (std::size_t i : candidates) {
        if (detail::zhang_suen_removable(img, static_cast<int>(i % w), static_cast<int>(i / w), sub)) {
          img[i] = 0;
          changed = true;
        }
      }
      std::erase_if(fg, [&](std::size_t i) { return img[i] == 0; });
    }
  }
  return img;
}

/// True if some pixel of `skeleton` still satisfies either sub-iteration's
/// deletion conditions.
inline bool has_removable_pixel(const BinaryMask& skeleton) {
  for (int y = 0; y < skeleton.height(); ++y) {
    for (int x = 0; x < skeleton.width(); ++x) {
      if (!skeleton(x, y)) continue;
      if (detail::zhang_suen_removable(skeleton, x, y, 0) || detail::zhang_suen_removable(skeleton, x, y, 1)) {
        return true;
      }
    }
  }
  return false;
}

inline constexpr double kThinVesselRadius = 1.2;

struct VesselPartition {
  BinaryMask thin;
  BinaryMask thick;
  BinaryMask skeleton;
  GrayImage radius;
};

/// Labels centerline pixels thin when their local radius is <= tau, then
/// gives every vessel pixel the label of its nearest centerline pixel (ties
/// go to thin).
inline VesselPartition partition_thin_thick(const BinaryMask& m, double tau = kThinVesselRadius) {
  VesselPartition out{BinaryMask(m.width(), m.height()), BinaryMask(m.width(), m.height()), skeletonize(m),
                      radius_map(m)};
  BinaryMask thin_seeds(m.width(), m.height());
  BinaryMask thick_seeds(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!out.skeleton[i]) continue;
    (out.radius[i] <= tau ? thin_seeds : thick_seeds)[i] = 1;
  }
  const Grid<double> to_thin = squared_distance_to_seeds(thin_seeds);
  const Grid<double> to_thick = squared_distance_to_seeds(thick_seeds);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    (to_thin[i] <= to_thick[i] ? out.thin : out.thick)[i] = 1;
  }
  return out;
}

/// 2|P n T| / (|P| + |T|); 1.0 when both sets are empty.
inline double dice(const BinaryMask& p, const BinaryMask& t) {
  require_same_shape(p, t, "dice");
  std::size_t inter = 0, np = 0, nt = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    np += p[i] ? 1 : 0;
    nt += t[i] ? 1 : 0;
    inter += (p[i] && t[i]) ? 1 : 0;
  }
  if (np + nt == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

struct PartitionedDice {
  double thin = 1.0;
  double thick = 1.0;
};

/// Width-stratified Dice: prediction and ground truth are partitioned
/// independently, then compared class by class.
inline PartitionedDice dsc_partitioned(const BinaryMask& pred, const BinaryMask& gt, double tau = kThinVesselRadius) {
  require_same_shape(pred, gt, "dsc_partitioned");
  const VesselPartition p = partition_thin_thick(pred, tau);
  const VesselPartition t = partition_thin_thick(gt, tau);
  return {dice(p.thin, t.thin), dice(p.thick, t.thick)};
}

}  // namespace dgssa::metrics
