#pragma once

// Tree rasterization and the binary post-processing chain that turns a grown
// tree into a structure mask.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgssa/colonize.hpp"
#include "dgssa/error.hpp"
#include "dgssa/image.hpp"

namespace dgssa::raster {

namespace detail {

inline void stamp_capsule(GrayImage& img, Point2 a, Point2 b, double ra, double rb) {
  const double rmax = std::max(ra, rb);
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - rmax - 1.0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - rmax - 1.0)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + rmax + 1.0)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + rmax + 1.0)));
  const Point2 ab = b - a;
  const double len_sq = norm_sq(ab);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Point2 c = pixel_center(x, y);
      const double t = len_sq > 0.0 ? std::clamp(dot(c - a, ab) / len_sq, 0.0, 1.0) : 0.0;
      const Point2 q = a + t * ab;
      const double r = ra + (rb - ra) * t;
      if (distance(c, q) <= r) img(x, y) = 1.0;
    }
  }
}

}  // namespace detail

/// Paints every parent->child segment as a capsule whose radius varies
/// linearly between the endpoint radii; single nodes paint a disk.
inline GrayImage rasterize(const colonize::VesselTree& t, int width, int height) {
  GrayImage img(width, height, 0.0);
  if (width <= 0 || height <= 0) return img;
  for (const auto& node : t.nodes) {
    if (node.parent) {
      const auto& p = t.nodes[*node.parent];
      detail::stamp_capsule(img, p.position, node.position, p.radius, node.radius);
    } else {
      detail::stamp_capsule(img, node.position, node.position, node.radius, node.radius);
    }
  }
  return img;
}

/// Foreground where intensity is strictly greater than `t`.
inline BinaryMask threshold(const GrayImage& img, double t) {
  BinaryMask out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] > t ? 1 : 0;
  return out;
}

enum class Connectivity { Four = 4, Eight = 8 };

struct Components {
  Grid<int> labels;  // -1 = background, otherwise component id in discovery order
  std::vector<std::size_t> sizes;
};

/// Flood-fill labelling in row-major discovery order.
inline Components label_components(const BinaryMask& m, Connectivity conn) {
  Components out{Grid<int>(m.width(), m.height(), -1), {}};
  std::vector<std::size_t> stack;
  const int w = m.width();
  const int h = m.height();
  for (std::size_t start = 0; start < m.size(); ++start) {
    if (!m[start] || out.labels[start] >= 0) continue;
    const int id = static_cast<int>(out.sizes.size());
    std::size_t count = 0;
    out.labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++count;
      const int cx = static_cast<int>(cur % static_cast<std::size_t>(w));
      const int cy = static_cast<int>(cur / static_cast<std::size_t>(w));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (conn == Connectivity::Four && dx != 0 && dy != 0) continue;
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t ni = m.index(nx, ny);
          if (!m[ni] || out.labels[ni] >= 0) continue;
          out.labels[ni] = id;
          stack.push_back(ni);
        }
      }
    }
    out.sizes.push_back(count);
  }
  return out;
}

/// Keeps only the biggest component; ties go to the one whose first pixel
/// comes earliest in row-major order.
inline BinaryMask largest_component(const BinaryMask& m, Connectivity conn = Connectivity::Eight) {
  const Components c = label_components(m, conn);
  BinaryMask out(m.width(), m.height());
  if (c.sizes.empty()) return out;
  const int best = static_cast<int>(std::max_element(c.sizes.begin(), c.sizes.end()) - c.sizes.begin());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = c.labels[i] == best ? 1 : 0;
  return out;
}

enum class StructuringElement { Cross, Square };

namespace detail {

// Out-of-canvas neighbors are skipped, i.e. treated as foreground for
// erosion and background for dilation, so the two operators are exact duals.
template <bool Erode>
BinaryMask morph_once(const BinaryMask& m, StructuringElement se) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool acc = Erode;
      for (int dy = -1; dy <= 1 && acc == Erode; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (se == StructuringElement::Cross && dx != 0 && dy != 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (!m.contains(nx, ny)) continue;
          const bool v = m(nx, ny) != 0;
          if (Erode && !v) {
            acc = false;
            break;
          }
          if (!Erode && v) {
            acc = true;
            break;
          }
        }
      }
      out(x, y) = acc ? 1 : 0;
    }
  }
  return out;
}

}  // namespace detail

inline BinaryMask erode(const BinaryMask& m, StructuringElement se, int iterations) {
  if (iterations < 0) throw Error(Errc::InvalidArgument, "erosion iterations must be >= 0");
  BinaryMask out = m;
  for (int i = 0; i < iterations; ++i) out = detail::morph_once<true>(out, se);
  return out;
}

inline BinaryMask dilate(const BinaryMask& m, StructuringElement se, int iterations) {
  if (iterations < 0) throw Error(Errc::InvalidArgument, "dilation iterations must be >= 0");
  BinaryMask out = m;
  for (int i = 0; i < iterations; ++i) out = detail::morph_once<false>(out, se);
  return out;
}

/// Pixel-wise AND with the region of interest.
inline BinaryMask fit_to_roi(const BinaryMask& m, const BinaryMask& roi) {
  require_same_shape(m, roi, "fit_to_roi");
  BinaryMask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] && roi[i]) ? 1 : 0;
  return out;
}

struct StructureOptions {
  int erosion_iterations = 1;
  StructuringElement element = StructuringElement::Cross;
  double raster_threshold = 0.0;
  /// Terminal branches shorter than this are dropped before rasterizing; 0 disables.
  double min_branch_length = 0.0;
  Connectivity connectivity = Connectivity::Eight;
};

struct Structure {
  colonize::VesselTree tree;  // radii assigned
  BinaryMask mask;
};

/// grow -> radii -> rasterize -> threshold -> largest component -> erode ->
/// fit to ROI -> largest component. The final component pass restores a
/// single component if erosion or ROI trimming split the vessel.
inline Structure make_structure(const BinaryMask& roi, const colonize::GrowthParams& params,
                                std::size_t attractor_count, const StructureOptions& opts = {}) {
  colonize::VesselTree tree = colonize::grow(roi, params, attractor_count);
  tree = colonize::prune_short_branches(tree, opts.min_branch_length);
  tree = colonize::assign_radii(std::move(tree), params.leaf_radius, params.murray_exponent);
  BinaryMask m = threshold(rasterize(tree, roi.width(), roi.height()), opts.raster_threshold);
  m = largest_component(m, opts.connectivity);
  m = erode(m, opts.element, opts.erosion_iterations);
  m = fit_to_roi(m, roi);
  m = largest_component(m, opts.connectivity);
  return Structure{std::move(tree), std::move(m)};
}

inline BinaryMask make_structure_mask(const BinaryMask& roi, const colonize::GrowthParams& params,
                                      std::size_t attractor_count, const StructureOptions& opts = {}) {
  return make_structure(roi, params, attractor_count, opts).mask;
}

}  // namespace dgssa::raster
