#pragma once

// PipelineConfig and its JSON representation; vessel tree export.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"

#include "dgssa/colonize.hpp"
#include "dgssa/error.hpp"
#include "dgssa/raster.hpp"
#include "dgssa/styleaug.hpp"
#include "dgssa/vessel_width.hpp"

namespace dgssa::io {

using nlohmann::json;

struct PipelineConfig {
  colonize::GrowthParams growth;
  std::size_t attractor_count = 3000;
  raster::StructureOptions structure;
  style::StyleConfig style;
  std::size_t masks_per_dataset = 100;
  double thin_threshold_tau = metrics::kThinVesselRadius;
  double binarize_threshold = 0.5;
  std::uint64_t master_seed = 0;
};

inline json to_json(const colonize::VesselTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"x", n.position.x},
                     {"y", n.position.y},
                     {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                     {"radius", n.radius}});
  }
  return json{{"nodes", std::move(nodes)}};
}

inline colonize::VesselTree tree_from_json(const json& j) {
  colonize::VesselTree t;
  for (const auto& n : j.at("nodes")) {
    colonize::TreeNode node;
    node.position = {n.at("x").get<double>(), n.at("y").get<double>()};
    if (!n.at("parent").is_null()) node.parent = n.at("parent").get<std::size_t>();
    node.radius = n.at("radius").get<double>();
    t.nodes.push_back(node);
  }
  return t;
}

inline json to_json(const PipelineConfig& c) {
  json catalog = json::array();
  for (const auto& e : c.style.catalog) catalog.push_back({{"op", style::to_string(e.op)}, {"lo", e.lo}, {"hi", e.hi}});
  json growth = {{"attraction_radius", c.growth.attraction_radius},
                 {"kill_radius", c.growth.kill_radius},
                 {"segment_length", c.growth.segment_length},
                 {"max_nodes", c.growth.max_nodes},
                 {"perturb_sigma", c.growth.perturb_sigma},
                 {"leaf_radius", c.growth.leaf_radius},
                 {"murray_exponent", c.growth.murray_exponent}};
  if (c.growth.root) growth["root"] = {c.growth.root->x, c.growth.root->y};
  return json{{"growth", growth},
              {"attractor_count", c.attractor_count},
              {"erosion_iterations", c.structure.erosion_iterations},
              {"structuring_element", c.structure.element == raster::StructuringElement::Cross ? "cross" : "square"},
              {"raster_threshold", c.structure.raster_threshold},
              {"min_branch_length", c.structure.min_branch_length},
              {"style",
               {{"max_rounds", c.style.max_rounds},
                {"mixing_ratio", c.style.mixing_ratio},
                {"perturb_prob", c.style.perturb_prob},
                {"sigma_floor", c.style.sigma_floor},
                {"resample_ratio", c.style.resample_ratio},
                {"catalog", catalog}}},
              {"masks_per_dataset", c.masks_per_dataset},
              {"thin_threshold_tau", c.thin_threshold_tau},
              {"binarize_threshold", c.binarize_threshold},
              {"master_seed", c.master_seed}};
}

namespace detail {

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

/// Overlays the keys present in `j` onto `c`; unknown keys are rejected.
inline void apply_json(PipelineConfig& c, const json& j) {
  static const char* kTop[] = {"growth", "attractor_count", "erosion_iterations", "structuring_element",
                               "raster_threshold", "min_branch_length", "style", "masks_per_dataset",
                               "thin_threshold_tau", "binarize_threshold", "master_seed"};
  try {
    for (const auto& [key, value] : j.items()) {
      if (std::find(std::begin(kTop), std::end(kTop), key) == std::end(kTop)) {
        throw Error(Errc::InvalidArgument, "unknown config key '" + key + "'");
      }
    }
    if (j.contains("growth")) {
      const json& g = j.at("growth");
      detail::read_opt(g, "attraction_radius", c.growth.attraction_radius);
      detail::read_opt(g, "kill_radius", c.growth.kill_radius);
      detail::read_opt(g, "segment_length", c.growth.segment_length);
      detail::read_opt(g, "max_nodes", c.growth.max_nodes);
      detail::read_opt(g, "perturb_sigma", c.growth.perturb_sigma);
      detail::read_opt(g, "leaf_radius", c.growth.leaf_radius);
      detail::read_opt(g, "murray_exponent", c.growth.murray_exponent);
      if (g.contains("root")) {
        const auto& r = g.at("root");
        c.growth.root = Point2{r.at(0).get<double>(), r.at(1).get<double>()};
      }
    }
    detail::read_opt(j, "attractor_count", c.attractor_count);
    detail::read_opt(j, "erosion_iterations", c.structure.erosion_iterations);
    if (j.contains("structuring_element")) {
      const auto se = j.at("structuring_element").get<std::string>();
      if (se == "cross") c.structure.element = raster::StructuringElement::Cross;
      else if (se == "square") c.structure.element = raster::StructuringElement::Square;
      else throw Error(Errc::InvalidArgument, "structuring_element must be 'cross' or 'square'");
    }
    detail::read_opt(j, "raster_threshold", c.structure.raster_threshold);
    detail::read_opt(j, "min_branch_length", c.structure.min_branch_length);
    if (j.contains("style")) {
      const json& s = j.at("style");
      detail::read_opt(s, "max_rounds", c.style.max_rounds);
      detail::read_opt(s, "mixing_ratio", c.style.mixing_ratio);
      detail::read_opt(s, "perturb_prob", c.style.perturb_prob);
      detail::read_opt(s, "sigma_floor", c.style.sigma_floor);
      detail::read_opt(s, "resample_ratio", c.style.resample_ratio);
      if (s.contains("catalog")) {
        c.style.catalog.clear();
        for (const auto& e : s.at("catalog")) {
          c.style.catalog.push_back({style::photo_op_from_string(e.at("op").get<std::string>()),
                                     e.at("lo").get<double>(), e.at("hi").get<double>()});
        }
      }
    }
    detail::read_opt(j, "masks_per_dataset", c.masks_per_dataset);
    detail::read_opt(j, "thin_threshold_tau", c.thin_threshold_tau);
    detail::read_opt(j, "binarize_threshold", c.binarize_threshold);
    detail::read_opt(j, "master_seed", c.master_seed);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("config: ") + e.what());
  }
  colonize::validate(c.growth);
  style::validate(c.style);
  if (c.structure.erosion_iterations < 0) throw Error(Errc::InvalidArgument, "erosion_iterations must be >= 0");
  if (c.attractor_count < 1) throw Error(Errc::InvalidArgument, "attractor_count must be >= 1");
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::Format, path.string() + ": " + e.what());
  }
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig c;
  apply_json(c, read_json(path));
  return c;
}

}  // namespace dgssa::io
