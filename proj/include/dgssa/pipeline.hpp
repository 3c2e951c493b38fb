#pragma once

// Batch commands: structure-mask generation, style augmentation, evaluation
// reports, domain distance and paired t-tests.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dgssa/colonize.hpp"
#include "dgssa/error.hpp"
#include "dgssa/image.hpp"
#include "dgssa/io/array_file.hpp"
#include "dgssa/io/config.hpp"
#include "dgssa/io/csv.hpp"
#include "dgssa/io/manifest.hpp"
#include "dgssa/io/png.hpp"
#include "dgssa/metrics.hpp"
#include "dgssa/random.hpp"
#include "dgssa/raster.hpp"
#include "dgssa/stats.hpp"
#include "dgssa/styleaug.hpp"
#include "dgssa/vessel_width.hpp"

namespace dgssa::pipeline {

namespace fs = std::filesystem;
using io::json;

/// Worker count from DGSSA_THREADS, else the hardware concurrency.
inline std::size_t thread_count_from_env() {
  if (const char* env = std::getenv("DGSSA_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. If any call throws,
/// the exception from the lowest index is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(n, 1));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, dir.string() + ": " + ec.message());
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Nearest-neighbor resampling, used to bring a ROI to a requested output size.
inline BinaryMask resize_nearest(const BinaryMask& m, int width, int height) {
  if (m.width() == width && m.height() == height) return m;
  BinaryMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(m.height() - 1, static_cast<int>((y + 0.5) * m.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(m.width() - 1, static_cast<int>((x + 0.5) * m.width() / width));
      out(x, y) = m(sx, sy);
    }
  }
  return out;
}

// ---------------------------------------------------------------- gen

inline std::uint64_t mask_seed(std::uint64_t master, const std::string& dataset, std::size_t index) {
  return derive_seed(master, dataset, index);
}

/// Regenerates one structure mask from its logged seed.
inline raster::Structure generate_one(const BinaryMask& roi, const io::PipelineConfig& cfg, std::uint64_t seed) {
  colonize::GrowthParams params = cfg.growth;
  params.seed = seed;
  return raster::make_structure(roi, params, cfg.attractor_count, cfg.structure);
}

struct GenOptions {
  fs::path out_dir;
  std::size_t threads = 1;
  bool timings = false;
  std::optional<std::pair<int, int>> resize;
};

/// Writes `<dataset>_gen_<index:04>.png` masks plus their tree JSON and a
/// run log. Outputs do not depend on the thread count.
inline json cmd_gen(const std::vector<io::DatasetManifest>& datasets, const io::PipelineConfig& cfg,
                    const GenOptions& opts) {
  ensure_dir(opts.out_dir);
  json log = {{"command", "gen"}, {"config", io::to_json(cfg)}, {"datasets", json::array()}};
  const auto t_start = std::chrono::steady_clock::now();

  for (const auto& ds : datasets) {
    // mask i uses the ROI of entry i mod N
    std::vector<fs::path> roi_paths;
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
      if (auto r = ds.roi_for(i)) roi_paths.push_back(*r);
    }
    if (roi_paths.empty() && ds.roi) roi_paths.push_back(*ds.roi);
    if (roi_paths.empty() && cfg.masks_per_dataset > 0) {
      throw Error(Errc::EmptyRoi, "dataset '" + ds.name + "' has no ROI (entry or global)");
    }
    std::vector<BinaryMask> rois;
    for (const auto& p : roi_paths) {
      BinaryMask roi = io::read_mask(p);
      if (opts.resize) roi = resize_nearest(roi, opts.resize->first, opts.resize->second);
      if (count_foreground(roi) == 0) throw Error(Errc::EmptyRoi, p.string() + ": ROI has no foreground");
      rois.push_back(std::move(roi));
    }

    const std::size_t n = cfg.masks_per_dataset;
    std::vector<raster::Structure> results(n);
    std::vector<double> millis(n, 0.0);
    parallel_for(n, opts.threads, [&](std::size_t i) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        results[i] = generate_one(rois[i % rois.size()], cfg, mask_seed(cfg.master_seed, ds.name, i));
      } catch (const Error& e) {
        throw Error(e.code(), roi_paths[i % rois.size()].string() + ": " + e.what());
      }
      millis[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    });

    json items = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const std::string stem = ds.name + "_gen_" + zero_pad(i, 4);
      io::write_png(opts.out_dir / (stem + ".png"), to_pixels(results[i].mask));
      io::write_text(opts.out_dir / (stem + ".json"), dump(io::to_json(results[i].tree)));
      json item = {{"index", i},
                   {"seed", mask_seed(cfg.master_seed, ds.name, i)},
                   {"mask", stem + ".png"},
                   {"tree", stem + ".json"},
                   {"roi", roi_paths[i % rois.size()].filename().string()},
                   {"nodes", results[i].tree.size()},
                   {"foreground_pixels", count_foreground(results[i].mask)}};
      if (opts.timings) item["millis"] = millis[i];
      items.push_back(std::move(item));
    }
    log["datasets"].push_back({{"name", ds.name}, {"masks", std::move(items)}});
  }
  if (opts.timings) {
    log["total_millis"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  }
  io::write_text(opts.out_dir / "run_log.json", dump(log));
  return log;
}

// ---------------------------------------------------------------- augment

struct AugmentOptions {
  fs::path out_dir;
  /// Directory of mixing images; empty means "self" mode (other training images).
  std::optional<fs::path> mixers_dir;
  std::size_t threads = 1;
};

inline std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::Io, dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::uint64_t augment_seed(std::uint64_t master, const std::string& dataset, std::size_t index) {
  return derive_seed(master, "augment:" + dataset, index);
}

/// One `<stem>_aug.png` per manifest image via pixmix; masks are copied
/// byte-for-byte into `labels/`.
inline json cmd_augment(const std::vector<io::DatasetManifest>& datasets, const io::PipelineConfig& cfg,
                        const AugmentOptions& opts) {
  struct Item {
    const io::DatasetManifest* ds;
    std::size_t index;
  };
  std::vector<Item> items;
  for (const auto& ds : datasets) {
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
      if (ds.entries[i].image.empty()) throw Error(Errc::Format, "dataset '" + ds.name + "' entry without image");
      items.push_back({&ds, i});
    }
  }

  std::vector<RgbImage> external;
  if (opts.mixers_dir) {
    for (const auto& p : list_pngs(*opts.mixers_dir)) external.push_back(io::read_rgb(p));
    if (external.empty()) throw Error(Errc::NoMixers, opts.mixers_dir->string() + ": no PNG mixing images");
  } else if (items.size() < 2) {
    throw Error(Errc::NoMixers, "self mode needs at least two training images");
  }

  std::vector<RgbImage> inputs(items.size());
  parallel_for(items.size(), opts.threads,
               [&](std::size_t k) { inputs[k] = io::read_rgb(items[k].ds->entries[items[k].index].image); });

  ensure_dir(opts.out_dir);
  std::vector<RgbImage> outputs(items.size());
  parallel_for(items.size(), opts.threads, [&](std::size_t k) {
    const RgbImage& x = inputs[k];
    std::vector<RgbImage> mixers;
    if (opts.mixers_dir) {
      for (const auto& z : external) mixers.push_back(resize_bilinear(z, x.width(), x.height()));
    } else {
      for (std::size_t j = 0; j < inputs.size(); ++j) {
        if (j != k) mixers.push_back(resize_bilinear(inputs[j], x.width(), x.height()));
      }
    }
    style::StyleConfig sc = cfg.style;
    sc.seed = augment_seed(cfg.master_seed, items[k].ds->name, items[k].index);
    outputs[k] = style::pixmix(x, mixers, sc);
  });

  json log = {{"command", "augment"},
              {"config", io::to_json(cfg)},
              {"mixers", opts.mixers_dir ? json(opts.mixers_dir->string()) : json("self")},
              {"items", json::array()}};
  bool any_labels = false;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& entry = items[k].ds->entries[items[k].index];
    const std::string out_name = entry.image.stem().string() + "_aug.png";
    io::write_png(opts.out_dir / out_name, to_pixels(outputs[k]));
    json rec = {{"dataset", items[k].ds->name},
                {"index", items[k].index},
                {"seed", augment_seed(cfg.master_seed, items[k].ds->name, items[k].index)},
                {"source", entry.image.filename().string()},
                {"output", out_name}};
    if (entry.mask) {
      if (!any_labels) ensure_dir(opts.out_dir / "labels");
      any_labels = true;
      const auto dst = opts.out_dir / "labels" / entry.mask->filename();
      io::write_bytes(dst, io::read_bytes(*entry.mask));
      rec["label"] = "labels/" + entry.mask->filename().string();
    }
    log["items"].push_back(std::move(rec));
  }
  io::write_text(opts.out_dir / "augment_log.json", dump(log));
  return log;
}

// ---------------------------------------------------------------- eval

struct MetricsRow {
  std::string image;
  std::optional<double> dsc, acc, sp, recall, precision, auc, dsc_thin, dsc_thick;

  std::vector<std::optional<double>*> columns() {
    return {&dsc, &acc, &sp, &recall, &precision, &auc, &dsc_thin, &dsc_thick};
  }
  std::vector<const std::optional<double>*> columns() const {
    return {&dsc, &acc, &sp, &recall, &precision, &auc, &dsc_thin, &dsc_thick};
  }
};

inline constexpr const char* kReportHeader = "image,dsc,acc,sp,recall,precision,auc,dsc_thin,dsc_thick";

struct MetricsReport {
  std::vector<MetricsRow> rows;
  MetricsRow mean;

  std::string to_csv() const {
    std::string out = std::string(kReportHeader) + "\n";
    auto emit = [&](const MetricsRow& r) {
      out += r.image;
      for (const auto* c : r.columns()) out += "," + io::format_metric(*c);
      out += "\n";
    };
    for (const auto& r : rows) emit(r);
    emit(mean);
    return out;
  }
};

/// Column-wise mean over defined entries, Kahan-compensated in row order.
inline MetricsRow aggregate_mean(const std::vector<MetricsRow>& rows) {
  MetricsRow mean;
  mean.image = "MEAN";
  auto dst = mean.columns();
  for (std::size_t c = 0; c < dst.size(); ++c) {
    double sum = 0.0, comp = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      const auto& v = *r.columns()[c];
      if (!v) continue;
      const double y = *v - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      ++n;
    }
    if (n > 0) *dst[c] = sum / static_cast<double>(n);
  }
  return mean;
}

struct EvalInputs {
  GrayImage prob;
  BinaryMask gt;
  std::optional<BinaryMask> roi;
};

/// Metrics for one image. Binary metrics use prob >= threshold; AUC uses the
/// raw probabilities and is left undefined when only one class is present.
inline MetricsRow evaluate_image(const std::string& name, const EvalInputs& in, double threshold,
                                 std::optional<double> thin_tau, PixelBuffer* overlay = nullptr) {
  require_same_shape(in.prob, in.gt, name.c_str());
  if (in.roi) require_same_shape(in.prob, *in.roi, name.c_str());
  BinaryMask pred(in.prob.width(), in.prob.height());
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = in.prob[i] >= threshold ? 1 : 0;
  const BinaryMask* roi = in.roi ? &*in.roi : nullptr;

  MetricsRow row;
  row.image = name;
  const auto m = metrics::basic_metrics(metrics::confusion(pred, in.gt, roi));
  row.dsc = m.dsc;
  row.acc = m.acc;
  row.sp = m.sp;
  row.recall = m.recall;
  row.precision = m.precision;
  try {
    row.auc = metrics::auc_roc(in.prob, in.gt, roi);
  } catch (const Error& e) {
    if (e.code() != Errc::SingleClass) throw;
  }
  if (thin_tau) {
    const BinaryMask p = roi ? raster::fit_to_roi(pred, *roi) : pred;
    const BinaryMask g = roi ? raster::fit_to_roi(in.gt, *roi) : in.gt;
    const auto d = metrics::dsc_partitioned(p, g, *thin_tau);
    row.dsc_thin = d.thin;
    row.dsc_thick = d.thick;
  }
  if (overlay) *overlay = metrics::error_overlay(pred, in.gt);
  return row;
}

struct EvalOptions {
  fs::path pred_dir;
  fs::path gt_dir;
  std::optional<fs::path> roi_dir;
  std::optional<fs::path> report_path;
  std::optional<fs::path> overlay_dir;
  bool thin = false;
  std::size_t threads = 1;
};

inline MetricsReport cmd_eval(const io::PipelineConfig& cfg, const EvalOptions& opts) {
  const auto preds = list_pngs(opts.pred_dir);
  const auto gts = list_pngs(opts.gt_dir);
  std::vector<std::string> names;
  std::vector<std::string> missing;
  for (const auto& g : gts) {
    const auto name = g.filename().string();
    if (fs::exists(opts.pred_dir / name)) names.push_back(name);
    else missing.push_back("prediction for " + name);
  }
  for (const auto& p : preds) {
    if (!fs::exists(opts.gt_dir / p.filename())) missing.push_back("ground truth for " + p.filename().string());
  }
  if (opts.roi_dir) {
    for (const auto& n : names) {
      if (!fs::exists(*opts.roi_dir / n)) missing.push_back("ROI for " + n);
    }
  }
  if (!missing.empty()) {
    std::string msg = "unmatched files:";
    for (const auto& m : missing) msg += " [" + m + "]";
    throw Error(Errc::MissingPair, msg);
  }

  if (opts.overlay_dir) ensure_dir(*opts.overlay_dir);
  MetricsReport report;
  report.rows.resize(names.size());
  std::vector<PixelBuffer> overlays(opts.overlay_dir ? names.size() : 0);
  parallel_for(names.size(), opts.threads, [&](std::size_t i) {
    EvalInputs in{to_gray(io::read_png(opts.pred_dir / names[i])), io::read_mask(opts.gt_dir / names[i]), std::nullopt};
    if (opts.roi_dir) in.roi = io::read_mask(*opts.roi_dir / names[i]);
    std::optional<double> tau;
    if (opts.thin) tau = cfg.thin_threshold_tau;
    report.rows[i] = evaluate_image(names[i], in, cfg.binarize_threshold, tau,
                                    opts.overlay_dir ? &overlays[i] : nullptr);
  });
  report.mean = aggregate_mean(report.rows);

  if (opts.overlay_dir) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      io::write_png(*opts.overlay_dir / (fs::path(names[i]).stem().string() + "_overlay.png"), overlays[i]);
    }
  }
  if (opts.report_path) io::write_text(*opts.report_path, report.to_csv());
  return report;
}

// ---------------------------------------------------------------- statistics

inline json cmd_distance(const fs::path& features_csv) {
  const auto table = io::read_feature_table(features_csv);
  const auto d = metrics::domain_inter_distance(table);
  json centers = json::object();
  for (const auto& [name, c] : d.centers) centers[name] = c;
  return {{"inter_distance", d.mean_distance},
          {"domains", d.domain_count},
          {"pairs", d.pair_count},
          {"centers", centers}};
}

inline json cmd_ttest(const fs::path& a_csv, const fs::path& b_csv, const std::optional<std::string>& column = {}) {
  const auto a = io::read_score_column(a_csv, column);
  const auto b = io::read_score_column(b_csv, column);
  const auto r = stats::paired_t_test(a, b);
  return {{"t", r.t}, {"p", r.p_two_sided}, {"dof", r.dof}, {"n", a.size()}, {"mean_difference", r.mean_difference}};
}

}  // namespace dgssa::pipeline
