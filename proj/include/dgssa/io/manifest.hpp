#pragma once

// Dataset manifests: a named list of image / mask / ROI paths.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/io/config.hpp"
#include "dgssa/io/png.hpp"

namespace dgssa::io {

struct ManifestEntry {
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;
  std::optional<std::filesystem::path> roi;
};

struct DatasetManifest {
  std::string name;
  std::optional<std::filesystem::path> roi;  // applies to entries without their own
  std::vector<ManifestEntry> entries;

  std::optional<std::filesystem::path> roi_for(std::size_t i) const {
    if (i < entries.size() && entries[i].roi) return entries[i].roi;
    return roi;
  }
};

/// Parses a manifest document. Relative paths resolve against `base`. Every
/// referenced file must exist and the files of one entry must agree in size.
inline DatasetManifest parse_manifest(const json& j, const std::filesystem::path& base) {
  auto resolve = [&](const json& v) -> std::filesystem::path {
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw Error(Errc::Io, p.string() + ": no such file");
    return p;
  };
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    if (j.contains("roi") && !j.at("roi").is_null()) m.roi = resolve(j.at("roi"));
    for (const auto& e : j.value("entries", json::array())) {
      ManifestEntry entry;
      if (e.contains("image") && !e.at("image").is_null()) entry.image = resolve(e.at("image"));
      if (e.contains("mask") && !e.at("mask").is_null()) entry.mask = resolve(e.at("mask"));
      if (e.contains("roi") && !e.at("roi").is_null()) entry.roi = resolve(e.at("roi"));
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Format, std::string("manifest: ") + e.what());
  }
  if (m.name.empty()) throw Error(Errc::Format, "manifest: dataset name is empty");
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    std::optional<PngInfo> ref;
    auto check = [&](const std::optional<std::filesystem::path>& p) {
      if (!p) return;
      const PngInfo info = png_info(*p);
      if (ref && (info.width != ref->width || info.height != ref->height)) {
        throw Error(Errc::DimensionMismatch, "manifest '" + m.name + "' entry " + std::to_string(i) +
                                                 ": image/mask/roi sizes disagree (" + p->string() + ")");
      }
      ref = info;
    };
    if (!m.entries[i].image.empty()) check(m.entries[i].image);
    check(m.entries[i].mask);
    check(m.entries[i].roi);
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_json(path), path.parent_path());
}

}  // namespace dgssa::io
