// Command-line front end: dataset synthesis, training, generation, baselines,
// evaluation and distribution statistics.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathgan/assignment.hpp"
#include "pathgan/baselines.hpp"
#include "pathgan/error.hpp"
#include "pathgan/io.hpp"
#include "pathgan/kernels.hpp"
#include "pathgan/nn/checkpoint.hpp"
#include "pathgan/stats.hpp"
#include "pathgan/synth.hpp"
#include "pathgan/training.hpp"

namespace fs = std::filesystem;
using namespace pathgan;

namespace {

std::vector<Scanpath> load_scanpaths_any(const std::string& path) {
  if (fs::path(path).extension() == ".csv") return load_scanpaths_spherical_csv(path);
  return load_scanpaths_planar(path);
}

std::string csv_sibling(const std::string& out) {
  fs::path p(out);
  if (p.extension() == ".json") return p.replace_extension(".csv").string();
  return out + ".csv";
}

Geometry parse_geometry(const std::string& s) {
  if (s == "planar") return Geometry::planar();
  if (s == "spherical") return Geometry::spherical();
  fail(Err::UsageError, "--geometry must be planar or spherical, got '" + s + "'");
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  const SyntheticSpec spec = synthetic_spec_from_map(read_config_file(spec_path));
  const SyntheticDataset ds = generate_synthetic(spec);
  write_synthetic(ds, out_dir);
  std::printf("wrote %zu images, %zu scanpaths to %s\n", ds.image_ids.size(), ds.scanpaths.size(),
              out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& resume) {
  TrainConfig cfg = TrainConfig::from_file(config_path);
  if (cfg.dataset_dir.empty()) fail(Err::UsageError, "config needs dataset_dir");
  if (cfg.out_dir.empty()) fail(Err::UsageError, "config needs out_dir");
  if (resume.empty()) {
    TrainSession session(cfg);
    session.run();
    std::printf("trained %lld iterations; checkpoint %s\n", session.iterations_done(),
                session.final_checkpoint_path().c_str());
  } else {
    TrainSession session(cfg, load_checkpoint(resume));
    session.run();
    std::printf("resumed to %lld iterations; checkpoint %s\n", session.iterations_done(),
                session.final_checkpoint_path().c_str());
  }
  return 0;
}

int cmd_generate(const std::string& ckpt, const std::string& images_dir, int k,
                 std::uint64_t seed, const std::string& out) {
  LoadedModel lm = load_model_checkpoint(ckpt);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(images_dir)) {
    if (e.path().extension() == ".pgm") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(Err::ParseError, "no .pgm images under '" + images_dir + "'");

  std::vector<Scanpath> all;
  for (const std::string& f : files) {
    int maxval = 0;
    const SaliencyMap m = read_pgm(f, &maxval);
    Image img = bilinear_resize(to_image(m, maxval, 3), lm.image_width, lm.image_height);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        for (int c = 0; c < img.channels; ++c) img.at(y, x, c) -= lm.mean_pixel[c];
      }
    }
    const std::string id = fs::path(f).stem().string();
    std::vector<Scanpath> paths = generate_scanpaths(lm.model, img, id, k, seed);
    for (size_t j = 0; j < paths.size(); ++j) {
      paths[j].observer_id = "gen_" + std::to_string(j);
      all.push_back(std::move(paths[j]));
    }
  }
  write_scanpaths_planar(out, all);
  std::printf("wrote %zu scanpaths for %zu images to %s\n", all.size(), files.size(), out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gt_path,
                 const std::string& geometry, const std::string& out) {
  const Geometry g = parse_geometry(geometry);
  const GtSet preds = group_by_image(load_scanpaths_any(pred_path));
  const GtSet gt = group_by_image(load_scanpaths_any(gt_path));
  // file-backed predictions: every stored path for the image participates
  PredSource source = [&preds](const std::string& id, int) -> std::vector<Scanpath> {
    auto it = preds.find(id);
    return it == preds.end() ? std::vector<Scanpath>{} : it->second;
  };
  const EvalReport report = evaluate_dataset(source, gt, 0, g);
  write_text_file(out, report_json(report));
  write_text_file(csv_sibling(out), report_csv(report));
  std::printf("overall_mean %.6f over %zu images -> %s\n", report.overall_mean,
              report.per_image.size(), out.c_str());
  return 0;
}

int cmd_baseline(const std::string& kind, const std::string& gt_path,
                 const std::string& saliency_dir, std::uint64_t seed, int k,
                 const BaselineConfig& cfg_in, const std::string& out) {
  BaselineConfig cfg = cfg_in;
  cfg.seed = seed;
  const GtSet gt = group_by_image(load_scanpaths_any(gt_path));
  if (gt.empty()) fail(Err::ParseError, "ground truth file has no scanpaths");

  std::vector<Scanpath> all;
  auto label = [](std::vector<Scanpath>& paths) {
    for (size_t j = 0; j < paths.size(); ++j) paths[j].observer_id = "gen_" + std::to_string(j);
  };

  if (kind == "interchange") {
    Rng rng(derive_seed(seed, "baseline_interchange"));
    auto swapped = baseline_interchange(gt, rng);
    for (auto& [id, paths] : swapped) {
      label(paths);
      for (Scanpath& sp : paths) all.push_back(std::move(sp));
    }
  } else {
    int image_index = 0;
    for (const auto& [id, gts] : gt) {
      Rng rng(derive_seed(seed, "baseline_" + kind, static_cast<std::uint64_t>(image_index++)));
      std::vector<Scanpath> paths;
      for (int j = 0; j < k; ++j) {
        if (kind == "random") {
          paths.push_back(baseline_random(id, cfg, rng));
        } else if (kind == "gt-count") {
          paths.push_back(baseline_random_gt_count(gts[static_cast<size_t>(j) % gts.size()], cfg, rng));
        } else if (kind == "saliency") {
          if (saliency_dir.empty()) fail(Err::UsageError, "--kind saliency needs --saliency <dir>");
          const SaliencyMap map = read_pgm((fs::path(saliency_dir) / (id + ".pgm")).string());
          const int n = static_cast<int>(gts[static_cast<size_t>(j) % gts.size()].size());
          paths.push_back(baseline_saliency_sampling(id, map, n, cfg, rng));
        } else {
          fail(Err::UsageError, "--kind must be random|gt-count|saliency|interchange, got '" + kind + "'");
        }
      }
      label(paths);
      for (Scanpath& sp : paths) all.push_back(std::move(sp));
    }
  }
  write_scanpaths_planar(out, all);
  std::printf("wrote %zu baseline scanpaths to %s\n", all.size(), out.c_str());
  return 0;
}

int cmd_stats(const std::string& pred_path, const std::string& gt_path, int bins,
              const std::string& out) {
  const std::vector<Scanpath> preds = load_scanpaths_any(pred_path);
  const std::vector<Scanpath> gts = load_scanpaths_any(gt_path);
  const SpatialHistogram hp = spatial_histogram(preds, bins);
  const SpatialHistogram hg = spatial_histogram(gts, bins);
  const double kl = divergence(hp, hg);

  std::string text = "bins " + std::to_string(bins) + "\n";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", kl);
  text += "kl ";
  text += buf;
  text += "\npred_histogram\n";
  auto dump = [&](const SpatialHistogram& h) {
    for (int r = 0; r < h.bins; ++r) {
      for (int c = 0; c < h.bins; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", h.at(r, c));
        text += buf;
        text += c + 1 == h.bins ? '\n' : ' ';
      }
    }
  };
  dump(hp);
  text += "gt_histogram\n";
  dump(hg);
  write_text_file(out, text);
  std::printf("kl %.6f -> %s\n", kl, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional adversarial scanpath toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("pathgan 1.0 (kernels: ") +
                                        std::string(kernels::active_lane()) + ")");

  std::string config_path, resume;
  CLI::App* train = app.add_subcommand("train", "Train a model from a config file");
  train->add_option("--config", config_path, "flat key = value config")->required();
  train->add_option("--resume", resume, "checkpoint to resume from");

  std::string ckpt, images_dir, gen_out;
  int gen_k = 40;
  std::uint64_t gen_seed = 1;
  CLI::App* generate = app.add_subcommand("generate", "Sample scanpaths from a checkpoint");
  generate->add_option("--ckpt", ckpt)->required();
  generate->add_option("--images", images_dir, "directory of .pgm images")->required();
  generate->add_option("--k", gen_k, "scanpaths per image");
  generate->add_option("--seed", gen_seed);
  generate->add_option("--out", gen_out, "output planar-lines file")->required();

  std::string pred_path, gt_path, geometry = "planar", eval_out;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Matched Jarodzka evaluation");
  evaluate->add_option("--pred", pred_path)->required();
  evaluate->add_option("--gt", gt_path)->required();
  evaluate->add_option("--geometry", geometry, "planar|spherical");
  evaluate->add_option("--out", eval_out, "report path (JSON; CSV written alongside)")->required();

  std::string kind, bl_gt, saliency_dir, bl_out;
  std::uint64_t bl_seed = 1;
  int bl_k = 40;
  BaselineConfig bl_cfg;
  CLI::App* baseline = app.add_subcommand("baseline", "Reference scanpath generators");
  baseline->add_option("--kind", kind, "random|gt-count|saliency|interchange")->required();
  baseline->add_option("--gt", bl_gt)->required();
  baseline->add_option("--saliency", saliency_dir, "directory of <image_id>.pgm maps");
  baseline->add_option("--seed", bl_seed);
  baseline->add_option("--k", bl_k, "scanpaths per image");
  baseline->add_option("--len-min", bl_cfg.len_min);
  baseline->add_option("--len-max", bl_cfg.len_max);
  baseline->add_option("--dt-min", bl_cfg.dt_min);
  baseline->add_option("--dt-max", bl_cfg.dt_max);
  baseline->add_option("--out", bl_out)->required();

  std::string st_pred, st_gt, st_out;
  int bins = 16;
  CLI::App* stats = app.add_subcommand("stats", "Spatial fixation histograms and KL divergence");
  stats->add_option("--pred", st_pred)->required();
  stats->add_option("--gt", st_gt)->required();
  stats->add_option("--bins", bins);
  stats->add_option("--out", st_out)->required();

  std::string spec_path, synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic blob dataset");
  synth->add_option("--spec", spec_path, "flat key = value spec")->required();
  synth->add_option("--out", synth_out, "output dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit 0, usage problems exit 1
  }

  try {
    if (*train) return cmd_train(config_path, resume);
    if (*generate) return cmd_generate(ckpt, images_dir, gen_k, gen_seed, gen_out);
    if (*evaluate) return cmd_evaluate(pred_path, gt_path, geometry, eval_out);
    if (*baseline) return cmd_baseline(kind, bl_gt, saliency_dir, bl_seed, bl_k, bl_cfg, bl_out);
    if (*stats) return cmd_stats(st_pred, st_gt, bins, st_out);
    if (*synth) return cmd_synth(spec_path, synth_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == Err::UsageError ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
