// dgssa: structure-mask generation, style augmentation and evaluation CLI.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dgssa/io/array_file.hpp"
#include "dgssa/io/config.hpp"
#include "dgssa/io/manifest.hpp"
#include "dgssa/io/png.hpp"
#include "dgssa/losses.hpp"
#include "dgssa/pipeline.hpp"

namespace fs = std::filesystem;
using dgssa::io::json;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// Values from the config file, then explicit flags on top.
struct CommonFlags {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "PipelineConfig JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "master seed (overrides config)");
  }

  dgssa::io::PipelineConfig load() const {
    dgssa::io::PipelineConfig cfg = config ? dgssa::io::load_config(*config) : dgssa::io::PipelineConfig{};
    if (seed) cfg.master_seed = *seed;
    return cfg;
  }
};

std::vector<dgssa::io::DatasetManifest> load_manifests(const std::vector<fs::path>& paths) {
  std::vector<dgssa::io::DatasetManifest> out;
  for (const auto& p : paths) out.push_back(dgssa::io::load_manifest(p));
  return out;
}

void emit_json(const json& j, const std::optional<fs::path>& out) {
  if (out) {
    dgssa::io::write_text(*out, j.dump(2) + "\n");
  } else {
    std::cout << j.dump(2) << "\n";
  }
}

// Scores from a DGSA array file or an 8-bit PNG (values / 255).
std::vector<double> load_values(const fs::path& p) {
  if (p.extension() == ".png") {
    const auto px = dgssa::io::read_png(p);
    std::vector<double> v(px.bytes.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = px.bytes[i] / 255.0;
    return v;
  }
  return dgssa::io::read_array(p).values;
}

std::vector<std::uint8_t> load_labels(const fs::path& p) {
  std::vector<std::uint8_t> out;
  if (p.extension() == ".png") {
    const auto px = dgssa::io::read_png(p);
    for (auto b : px.bytes) out.push_back(b > 127 ? 1 : 0);
  } else {
    for (double v : dgssa::io::read_array(p).values) out.push_back(v > 0.5 ? 1 : 0);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DGSSA structure/style augmentation and vessel segmentation evaluation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate vessel-structure masks by space colonization");
  CommonFlags gen_common;
  gen_common.add_to(gen);
  std::vector<fs::path> gen_manifests;
  fs::path gen_out;
  std::optional<std::size_t> gen_masks, gen_attractors;
  std::optional<int> gen_erosion;
  std::optional<std::string> gen_resize;
  bool gen_timings = false;
  gen->add_option("--manifest", gen_manifests, "dataset manifest JSON (repeatable)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--masks", gen_masks, "masks per dataset");
  gen->add_option("--attractors", gen_attractors, "attractor count");
  gen->add_option("--erosion", gen_erosion, "erosion iterations");
  gen->add_option("--resize", gen_resize, "emit masks at WxH instead of ROI resolution");
  gen->add_flag("--timings", gen_timings, "record wall-clock timings in the run log");

  // augment
  auto* aug = app.add_subcommand("augment", "PixMix style augmentation with uncertainty perturbation");
  CommonFlags aug_common;
  aug_common.add_to(aug);
  std::vector<fs::path> aug_manifests;
  fs::path aug_out;
  std::string aug_mixers;
  std::optional<int> aug_rounds;
  std::optional<double> aug_delta, aug_prob;
  aug->add_option("--manifest", aug_manifests, "dataset manifest JSON (repeatable)")->required()->check(CLI::ExistingFile);
  aug->add_option("--mixers", aug_mixers, "directory of mixing images, or 'self'")->required();
  aug->add_option("--out", aug_out, "output directory")->required();
  aug->add_option("--rounds", aug_rounds, "maximum mixing rounds K");
  aug->add_option("--delta", aug_delta, "mixing ratio in [0,1]");
  aug->add_option("--prob", aug_prob, "uncertainty perturbation probability in [0,1]");

  // eval
  auto* ev = app.add_subcommand("eval", "segmentation metrics report");
  CommonFlags ev_common;
  ev_common.add_to(ev);
  dgssa::pipeline::EvalOptions ev_opts;
  std::optional<fs::path> ev_roi, ev_report, ev_overlay;
  std::optional<double> ev_threshold, ev_tau;
  ev->add_option("--pred", ev_opts.pred_dir, "prediction PNG directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--gt", ev_opts.gt_dir, "ground-truth PNG directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--roi", ev_roi, "field-of-view mask directory")->check(CLI::ExistingDirectory);
  ev->add_option("--report", ev_report, "CSV report path (stdout if omitted)");
  ev->add_option("--overlay", ev_overlay, "write TP/FP/FN overlays to this directory");
  ev->add_flag("--thin", ev_opts.thin, "add thin/thick vessel Dice columns");
  ev->add_option("--threshold", ev_threshold, "binarization threshold on v/255");
  ev->add_option("--tau", ev_tau, "thin-vessel radius threshold in pixels");

  // distance
  auto* dist = app.add_subcommand("distance", "mean Euclidean distance between domain feature centers");
  fs::path dist_features;
  std::optional<fs::path> dist_out;
  dist->add_option("--features", dist_features, "CSV: domain,f0,f1,...")->required()->check(CLI::ExistingFile);
  dist->add_option("--out", dist_out, "JSON output path (stdout if omitted)");

  // ttest
  auto* tt = app.add_subcommand("ttest", "paired t-test on two per-sample score lists");
  fs::path tt_a, tt_b;
  std::optional<std::string> tt_column;
  std::optional<fs::path> tt_out;
  tt->add_option("--a", tt_a, "first score CSV")->required()->check(CLI::ExistingFile);
  tt->add_option("--b", tt_b, "second score CSV")->required()->check(CLI::ExistingFile);
  tt->add_option("--column", tt_column, "header name of the score column (default: last column)");
  tt->add_option("--out", tt_out, "JSON output path (stdout if omitted)");

  // losses
  auto* ls = app.add_subcommand("losses", "evaluate closed-form losses over arrays (DGSA binary or PNG)");
  std::optional<fs::path> ls_gen, ls_real, ls_dgen_paired, ls_dgen_unpaired, ls_dreal, ls_dfake_paired,
      ls_dfake_unpaired, ls_seg_pred, ls_seg_gt;
  std::vector<fs::path> ls_scales;
  double ls_gp_paired = 0.0, ls_gp_unpaired = 0.0;
  bool ls_as_printed = false;
  dgssa::losses::LossWeights ls_w;
  ls->add_option("--generated", ls_gen, "generator output G(M_om)");
  ls->add_option("--real", ls_real, "real image paired with --generated");
  ls->add_option("--d-gen-paired", ls_dgen_paired, "D scores on generated images from original masks");
  ls->add_option("--d-gen-unpaired", ls_dgen_unpaired, "D scores on generated images from generated masks");
  ls->add_option("--d-real", ls_dreal, "D scores on real images");
  ls->add_option("--d-fake-paired", ls_dfake_paired, "D scores on fakes from original masks (discriminator step)");
  ls->add_option("--d-fake-unpaired", ls_dfake_unpaired, "D scores on fakes from generated masks (discriminator step)");
  ls->add_option("--gp-paired", ls_gp_paired, "precomputed gradient penalty, paired");
  ls->add_option("--gp-unpaired", ls_gp_unpaired, "precomputed gradient penalty, unpaired");
  ls->add_option("--scale", ls_scales, "per-scale discriminator score map (repeatable, up to 3)");
  ls->add_option("--seg-pred", ls_seg_pred, "segmentation probabilities");
  ls->add_option("--seg-gt", ls_seg_gt, "segmentation labels");
  ls->add_option("--lambda-l1", ls_w.l1, "L1 weight");
  ls->add_option("--lambda-adv", ls_w.adv, "adversarial weight");
  ls->add_option("--lambda-1", ls_w.disc, "discriminator term weight");
  ls->add_option("--lambda-gp", ls_w.gp, "gradient penalty weight");
  ls->add_flag("--as-printed", ls_as_printed, "use the literal sign of each formula instead of negative log-likelihood");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  const std::size_t threads = dgssa::pipeline::thread_count_from_env();
  try {
    if (*gen) {
      auto cfg = gen_common.load();
      if (gen_masks) cfg.masks_per_dataset = *gen_masks;
      if (gen_attractors) cfg.attractor_count = *gen_attractors;
      if (gen_erosion) cfg.structure.erosion_iterations = *gen_erosion;
      dgssa::pipeline::GenOptions opts{gen_out, threads, gen_timings, std::nullopt};
      if (gen_resize) {
        int w = 0, h = 0;
        if (std::sscanf(gen_resize->c_str(), "%dx%d", &w, &h) != 2 || w <= 0 || h <= 0) {
          throw dgssa::Error(dgssa::Errc::Usage, "--resize expects WxH");
        }
        opts.resize = std::make_pair(w, h);
      }
      const json log = dgssa::pipeline::cmd_gen(load_manifests(gen_manifests), cfg, opts);
      std::size_t total = 0;
      for (const auto& ds : log["datasets"]) total += ds["masks"].size();
      std::cerr << "wrote " << total << " masks to " << gen_out.string() << "\n";
    } else if (*aug) {
      auto cfg = aug_common.load();
      if (aug_rounds) cfg.style.max_rounds = *aug_rounds;
      if (aug_delta) cfg.style.mixing_ratio = *aug_delta;
      if (aug_prob) cfg.style.perturb_prob = *aug_prob;
      dgssa::style::validate(cfg.style);
      dgssa::pipeline::AugmentOptions opts{aug_out, std::nullopt, threads};
      if (aug_mixers != "self") opts.mixers_dir = aug_mixers;
      const json log = dgssa::pipeline::cmd_augment(load_manifests(aug_manifests), cfg, opts);
      std::cerr << "wrote " << log["items"].size() << " images to " << aug_out.string() << "\n";
    } else if (*ev) {
      auto cfg = ev_common.load();
      if (ev_threshold) cfg.binarize_threshold = *ev_threshold;
      if (ev_tau) cfg.thin_threshold_tau = *ev_tau;
      ev_opts.roi_dir = ev_roi;
      ev_opts.report_path = ev_report;
      ev_opts.overlay_dir = ev_overlay;
      ev_opts.threads = threads;
      const auto report = dgssa::pipeline::cmd_eval(cfg, ev_opts);
      if (!ev_report) std::cout << report.to_csv();
    } else if (*dist) {
      emit_json(dgssa::pipeline::cmd_distance(dist_features), dist_out);
    } else if (*tt) {
      emit_json(dgssa::pipeline::cmd_ttest(tt_a, tt_b, tt_column), tt_out);
    } else if (*ls) {
      namespace L = dgssa::losses;
      const auto sign = ls_as_printed ? L::SignConvention::AsPrinted : L::SignConvention::NegativeLogLikelihood;
      json out = {{"score_eps", L::kScoreEps},
                  {"sign_convention", ls_as_printed ? "as_printed" : "negative_log_likelihood"},
                  {"weights", {{"lambda_l1", ls_w.l1}, {"lambda_adv", ls_w.adv}, {"lambda_1", ls_w.disc}, {"lambda_gp", ls_w.gp}}}};
      std::optional<double> l1, adv_p, adv_u;
      if (ls_gen || ls_real) {
        if (!ls_gen || !ls_real) throw dgssa::Error(dgssa::Errc::Usage, "--generated and --real go together");
        l1 = L::l1_consistency(load_values(*ls_gen), load_values(*ls_real));
        out["l1"] = *l1;
      }
      if (ls_dgen_paired) out["adv_paired"] = *(adv_p = L::adv_generator(load_values(*ls_dgen_paired), sign));
      if (ls_dgen_unpaired) out["adv_unpaired"] = *(adv_u = L::adv_generator(load_values(*ls_dgen_unpaired), sign));
      if (l1 && adv_p && adv_u) out["generator_total"] = L::generator_total(*l1, *adv_p, *adv_u, ls_w);
      if (ls_dreal || ls_dfake_paired || ls_dfake_unpaired) {
        if (!ls_dreal || !ls_dfake_paired || !ls_dfake_unpaired) {
          throw dgssa::Error(dgssa::Errc::Usage, "--d-real, --d-fake-paired and --d-fake-unpaired go together");
        }
        const auto c = L::discriminator_components(load_values(*ls_dreal), load_values(*ls_dfake_paired),
                                                   load_values(*ls_dfake_unpaired), sign);
        out["d_real"] = c.real;
        out["d_fake_paired"] = c.fake_paired;
        out["d_fake_unpaired"] = c.fake_unpaired;
        out["discriminator_total"] = L::discriminator_total(c, ls_gp_paired, ls_gp_unpaired, ls_w);
      }
      if (!ls_scales.empty()) {
        if (ls_scales.size() > 3) throw dgssa::Error(dgssa::Errc::Usage, "at most three --scale maps");
        std::vector<std::vector<double>> maps;
        for (const auto& p : ls_scales) maps.push_back(load_values(p));
        out["multiscale"] = L::multiscale_aggregate(maps);
      }
      if (ls_seg_pred || ls_seg_gt) {
        if (!ls_seg_pred || !ls_seg_gt) throw dgssa::Error(dgssa::Errc::Usage, "--seg-pred and --seg-gt go together");
        out["bce"] = L::bce_segmentation(load_values(*ls_seg_pred), load_labels(*ls_seg_gt));
      }
      std::cout << out.dump(2) << "\n";
    }
  } catch (const dgssa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.code() == dgssa::Errc::Usage || e.code() == dgssa::Errc::InvalidArgument;
    return usage ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
