#pragma once

// Space-colonization growth of vessel-like trees and Murray's-law radii.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/geometry.hpp"
#include "dgssa/image.hpp"
#include "dgssa/random.hpp"

namespace dgssa::colonize {

/// Auxin sources. `alive` runs parallel to `points`; a dead attractor stays dead.
struct AttractorSet {
  std::vector<Point2> points;
  std::vector<std::uint8_t> alive;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t live_count() const noexcept {
    return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), std::uint8_t{1}));
  }
  static AttractorSet all_alive(std::vector<Point2> pts) {
    AttractorSet a;
    a.alive.assign(pts.size(), 1);
    a.points = std::move(pts);
    return a;
  }
  friend bool operator==(const AttractorSet&, const AttractorSet&) = default;
};

struct TreeNode {
  Point2 position;
  std::optional<std::size_t> parent;  // always an earlier index; empty only for the root
  double radius = 0.0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct VesselTree {
  std::vector<TreeNode> nodes;

  std::size_t size() const noexcept { return nodes.size(); }
  bool empty() const noexcept { return nodes.empty(); }

  std::vector<std::vector<std::size_t>> children() const {
    std::vector<std::vector<std::size_t>> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].parent) out[*nodes[i].parent].push_back(i);
    }
    return out;
  }

  friend bool operator==(const VesselTree&, const VesselTree&) = default;
};

struct GrowthParams {
  double attraction_radius = 5.0;
  double kill_radius = 5.0;
  double segment_length = 20.0;
  std::size_t max_nodes = 2000;
  double perturb_sigma = 2.0;
  double leaf_radius = 1.0;
  double murray_exponent = 3.0;
  std::uint64_t seed = 0;
  /// Overrides the default root placement when set.
  std::optional<Point2> root;
};

inline void validate(const GrowthParams& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.attraction_radius) || !positive(p.kill_radius) || !positive(p.segment_length) ||
      !positive(p.leaf_radius) || !positive(p.murray_exponent)) {
    throw Error(Errc::InvalidArgument, "growth radii, lengths and the Murray exponent must be > 0");
  }
  if (p.max_nodes < 1) throw Error(Errc::InvalidArgument, "max_nodes must be >= 1");
  if (!(p.perturb_sigma >= 0.0)) throw Error(Errc::InvalidArgument, "perturb_sigma must be >= 0");
}

namespace detail {

inline std::vector<std::size_t> foreground_indices(const BinaryMask& roi) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < roi.size(); ++i) {
    if (roi[i]) idx.push_back(i);
  }
  return idx;
}

inline Point2 center_of(const BinaryMask& roi, std::size_t i) {
  const int w = roi.width();
  return pixel_center(static_cast<int>(i % static_cast<std::size_t>(w)), static_cast<int>(i / static_cast<std::size_t>(w)));
}

inline bool inside_foreground(const BinaryMask& roi, Point2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  const double fx = std::floor(p.x);
  const double fy = std::floor(p.y);
  if (fx < 0 || fy < 0 || fx >= roi.width() || fy >= roi.height()) return false;
  return roi(static_cast<int>(fx), static_cast<int>(fy)) != 0;
}

/// Uniform hash grid over node positions. Queries must use a radius no larger
/// than the cell size.
class NodeGrid {
 public:
  explicit NodeGrid(double cell) : cell_(cell) {}

  void insert(std::size_t index, Point2 p) { cells_[key(cell_of(p.x), cell_of(p.y))].push_back(index); }

  template <typename Visit>
  void for_each_near(Point2 p, Visit&& visit) const {
    const std::int64_t cx = cell_of(p.x);
    const std::int64_t cy = cell_of(p.y);
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t idx : it->second) visit(idx);
      }
    }
  }

  double cell() const noexcept { return cell_; }

 private:
  std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
  static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(cy);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// Picks `count` distinct foreground pixel centers uniformly at random.
inline AttractorSet sample_attractors(const BinaryMask& roi, std::size_t count, std::uint64_t seed) {
  auto fg = detail::foreground_indices(roi);
  if (fg.empty()) throw Error(Errc::EmptyRoi, "ROI has no foreground pixels");
  if (count < 1) throw Error(Errc::InvalidArgument, "attractor count must be >= 1");
  if (fg.size() < count) {
    throw Error(Errc::InsufficientArea, "ROI has " + std::to_string(fg.size()) + " foreground pixels, " +
                                            std::to_string(count) + " attractors requested");
  }
  Rng rng(seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(fg.size() - i));
    std::swap(fg[i], fg[j]);
  }
  std::vector<Point2> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(detail::center_of(roi, fg[i]));
  return AttractorSet::all_alive(std::move(pts));
}

/// Gaussian jitter of every live attractor; points that leave the ROI snap to
/// the nearest foreground pixel center (ties to the lowest row-major index).
inline AttractorSet perturb_attractors(const AttractorSet& a, double sigma, std::uint64_t seed, const BinaryMask& roi) {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidArgument, "sigma must be >= 0");
  if (sigma == 0.0) return a;
  const auto fg = detail::foreground_indices(roi);
  if (fg.empty()) throw Error(Errc::EmptyRoi, "ROI has no foreground pixels");

  AttractorSet out = a;
  Rng rng(seed);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.alive[i]) continue;
    const double dx = sigma * rng.normal();
    const double dy = sigma * rng.normal();
    Point2 p{out.points[i].x + dx, out.points[i].y + dy};
    if (!detail::inside_foreground(roi, p)) {
      std::size_t best = fg.front();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t idx : fg) {
        const double d = distance_sq(p, detail::center_of(roi, idx));
        if (d < best_d) {
          best_d = d;
          best = idx;
        }
      }
      p = detail::center_of(roi, best);
    }
    out.points[i] = p;
  }
  return out;
}

/// attractor index -> influenced node index; empty for dead or out-of-range attractors.
using Association = std::vector<std::optional<std::size_t>>;

namespace detail {

inline Association associate(const AttractorSet& a, const VesselTree& t, const NodeGrid& grid, double d) {
  Association out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.alive[i]) continue;
    const Point2 p = a.points[i];
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    grid.for_each_near(p, [&](std::size_t n) {
      const double dist = distance(p, t.nodes[n].position);
      if (dist >= d) return;
      if (dist < best_d || (dist == best_d && best && n < *best)) {
        best_d = dist;
        best = n;
      }
    });
    out[i] = best;
  }
  return out;
}

}  // namespace detail

/// Maps each live attractor to its nearest node when that node is closer than `d`.
inline Association associate_attractors(const AttractorSet& a, const VesselTree& t, double d) {
  detail::NodeGrid grid(d);
  for (std::size_t n = 0; n < t.size(); ++n) grid.insert(n, t.nodes[n].position);
  return detail::associate(a, t, grid, d);
}

/// Normalized mean of unit vectors toward each influencing attractor, per node.
/// Nodes whose mean vector is shorter than 1e-9 (cancelling attractors) are omitted.
inline std::map<std::size_t, Point2> growth_directions(const VesselTree& t, const AttractorSet& a,
                                                       const Association& assoc) {
  struct Acc {
    Point2 sum;
    std::size_t count = 0;
  };
  std::map<std::size_t, Acc> acc;
  for (std::size_t i = 0; i < assoc.size(); ++i) {
    if (!assoc[i]) continue;
    const std::size_t n = *assoc[i];
    const Point2 delta = a.points[i] - t.nodes[n].position;
    const double len = norm(delta);
    auto& entry = acc[n];
    entry.count += 1;
    if (len > 0.0) entry.sum = entry.sum + (1.0 / len) * delta;
  }
  std::map<std::size_t, Point2> out;
  for (const auto& [node, e] : acc) {
    const Point2 mean = (1.0 / static_cast<double>(e.count)) * e.sum;
    const double len = norm(mean);
    if (len < 1e-9) continue;
    out.emplace(node, (1.0 / len) * mean);
  }
  return out;
}

enum class Termination { NodeBudget, NoLiveAttractors, NoInfluence };

struct KillEvent {
  std::size_t attractor = 0;
  std::size_t iteration = 0;
  /// Node that entered the kill radius; empty for stall kills.
  std::optional<std::size_t> node;
};

struct GrowthLog {
  std::size_t iterations = 0;
  std::vector<KillEvent> kills;
  Termination termination = Termination::NodeBudget;
};

struct GrowthResult {
  VesselTree tree;
  AttractorSet attractors;
  GrowthLog log;
};

/// The growth loop proper: associate, average directions, add nodes at
/// position + l * direction, prune attractors inside the kill radius.
///
/// An iteration that adds no new node (every candidate lands within 1e-6 px of
/// an existing node, or every direction cancels) kills the attractors that were
/// associated in it. The loop ends when the node budget is reached, no live
/// attractors remain, or no live attractor lies within the attraction radius
/// of any node.
inline GrowthResult colonize(AttractorSet attractors, Point2 root, const GrowthParams& params) {
  validate(params);
  constexpr double kSamePosition = 1e-6;
  const double d = params.attraction_radius;
  const double k = params.kill_radius;
  const double l = params.segment_length;

  GrowthResult r;
  r.attractors = std::move(attractors);
  r.tree.nodes.push_back(TreeNode{root, std::nullopt, 0.0});
  detail::NodeGrid grid(std::max({d, k, 1.0}));
  grid.insert(0, root);
  std::size_t checked_upto = 0;  // nodes below this index were already used for kill checks

  while (r.tree.size() < params.max_nodes) {
    if (r.attractors.live_count() == 0) {
      r.log.termination = Termination::NoLiveAttractors;
      return r;
    }
    const std::size_t iteration = r.log.iterations++;
    const Association assoc = detail::associate(r.attractors, r.tree, grid, d);
    const bool any_influence = std::any_of(assoc.begin(), assoc.end(), [](const auto& v) { return v.has_value(); });
    if (!any_influence) {
      r.log.termination = Termination::NoInfluence;
      return r;
    }

    const std::size_t first_new = r.tree.size();
    for (const auto& [node, dir] : growth_directions(r.tree, r.attractors, assoc)) {
      if (r.tree.size() >= params.max_nodes) break;
      const Point2 candidate = r.tree.nodes[node].position + l * dir;
      bool duplicate = false;
      grid.for_each_near(candidate, [&](std::size_t n) {
        if (distance(candidate, r.tree.nodes[n].position) <= kSamePosition) duplicate = true;
      });
      if (duplicate) continue;
      grid.insert(r.tree.size(), candidate);
      r.tree.nodes.push_back(TreeNode{candidate, node, 0.0});
    }

    if (r.tree.size() == first_new) {
      // stall
      for (std::size_t i = 0; i < assoc.size(); ++i) {
        if (!assoc[i]) continue;
        r.attractors.alive[i] = 0;
        r.log.kills.push_back(KillEvent{i, iteration, std::nullopt});
      }
      continue;
    }

    for (std::size_t i = 0; i < r.attractors.size(); ++i) {
      if (!r.attractors.alive[i]) continue;
      const Point2 p = r.attractors.points[i];
      std::optional<std::size_t> killer;
      grid.for_each_near(p, [&](std::size_t n) {
        if (n < checked_upto) return;
        if (distance(p, r.tree.nodes[n].position) < k && (!killer || n < *killer)) killer = n;
      });
      if (killer) {
        r.attractors.alive[i] = 0;
        r.log.kills.push_back(KillEvent{i, iteration, killer});
      }
    }
    checked_upto = r.tree.size();
  }
  r.log.termination = Termination::NodeBudget;
  return r;
}

/// Foreground pixel center closest to the midpoint of the left edge of the
/// ROI's bounding box (ties to the lowest row-major index).
inline Point2 default_root(const BinaryMask& roi) {
  const auto fg = detail::foreground_indices(roi);
  if (fg.empty()) throw Error(Errc::EmptyRoi, "ROI has no foreground pixels");
  int xmin = roi.width(), ymin = roi.height(), ymax = -1;
  for (std::size_t i : fg) {
    const int x = static_cast<int>(i % static_cast<std::size_t>(roi.width()));
    const int y = static_cast<int>(i / static_cast<std::size_t>(roi.width()));
    xmin = std::min(xmin, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const Point2 target{static_cast<double>(xmin), (ymin + ymax + 1) / 2.0};
  Point2 best = detail::center_of(roi, fg.front());
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i : fg) {
    const Point2 c = detail::center_of(roi, i);
    const double dd = distance_sq(c, target);
    if (dd < best_d) {
      best_d = dd;
      best = c;
    }
  }
  return best;
}

/// sample -> perturb -> colonize, with all randomness derived from params.seed.
inline GrowthResult grow_traced(const BinaryMask& roi, const GrowthParams& params, std::size_t attractor_count) {
  validate(params);
  const std::uint64_t sample_seed = splitmix64(params.seed ^ 0x5A4D504C45ULL);
  const std::uint64_t perturb_seed = splitmix64(params.seed ^ 0x5045525455ULL);
  AttractorSet a = sample_attractors(roi, attractor_count, sample_seed);
  a = perturb_attractors(a, params.perturb_sigma, perturb_seed, roi);
  const Point2 root = params.root ? *params.root : default_root(roi);
  return colonize(std::move(a), root, params);
}

inline VesselTree grow(const BinaryMask& roi, const GrowthParams& params, std::size_t attractor_count) {
  return grow_traced(roi, params, attractor_count).tree;
}

/// Leaves get `leaf_radius`; every other node gets (sum of child radius^n)^(1/n).
/// A single-child node copies its child's radius exactly.
inline VesselTree assign_radii(VesselTree t, double leaf_radius, double n) {
  const std::size_t count = t.size();
  std::vector<double> pow_sum(count, 0.0);
  std::vector<std::size_t> child_count(count, 0);
  std::vector<double> only_child(count, 0.0);
  for (std::size_t i = count; i-- > 0;) {
    auto& node = t.nodes[i];
    if (child_count[i] == 0) {
      node.radius = leaf_radius;
    } else if (child_count[i] == 1) {
      node.radius = only_child[i];
    } else {
      node.radius = std::pow(pow_sum[i], 1.0 / n);
    }
    if (node.parent) {
      const std::size_t p = *node.parent;
      child_count[p] += 1;
      pow_sum[p] += std::pow(node.radius, n);
      only_child[p] = node.radius;
    }
  }
  return t;
}

/// Removes terminal branches (leaf up to the nearest branching node) whose
/// polyline length is below `min_length`. A branch reaching the root is kept.
/// Node order is preserved; radii are not recomputed.
inline VesselTree prune_short_branches(const VesselTree& t, double min_length) {
  if (min_length <= 0.0 || t.size() < 2) return t;
  const auto kids = t.children();
  std::vector<std::uint8_t> drop(t.size(), 0);
  for (std::size_t leaf = 0; leaf < t.size(); ++leaf) {
    if (!kids[leaf].empty() || !t.nodes[leaf].parent) continue;
    std::vector<std::size_t> chain{leaf};
    double length = 0.0;
    std::size_t cur = leaf;
    bool reached_root = false;
    while (true) {
      const std::size_t parent = *t.nodes[cur].parent;
      length += distance(t.nodes[cur].position, t.nodes[parent].position);
      if (kids[parent].size() >= 2) break;
      if (!t.nodes[parent].parent) {
        reached_root = true;
        break;
      }
      chain.push_back(parent);
      cur = parent;
    }
    if (!reached_root && length < min_length) {
      for (std::size_t c : chain) drop[c] = 1;
    }
  }
  VesselTree out;
  std::vector<std::size_t> remap(t.size(), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (drop[i]) continue;
    remap[i] = out.nodes.size();
    TreeNode node = t.nodes[i];
    if (node.parent) node.parent = remap[*node.parent];
    out.nodes.push_back(node);
  }
  return out;
}

}  // namespace dgssa::colonize
