#include "pathgan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "pathgan/error.hpp"
#include "pathgan/io.hpp"
#include "pathgan/rng.hpp"

namespace pathgan {

void validate_spec(const SyntheticSpec& spec) {
  if (spec.n_images < 1 || spec.image_width < 1 || spec.image_height < 1 || spec.observers < 1 ||
      spec.blobs_min < 1 || spec.blobs_min > spec.blobs_max) {
    fail(Err::ValidationError, "synthetic spec counts must be >= 1 and ordered");
  }
  if (!(spec.center_sigma > 0.0) || !(spec.noise_sigma > 0.0)) {
    fail(Err::ValidationError, "synthetic spec sigmas must be > 0");
  }
  if (!(spec.dt_min > 0.0) || spec.dt_min > spec.dt_max) {
    fail(Err::ValidationError, "synthetic dt bounds must satisfy 0 < dt_min <= dt_max");
  }
}

SyntheticSpec synthetic_spec_from_map(const std::map<std::string, std::string>& kv) {
  SyntheticSpec s;
  auto geti = [&](const char* key, int& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = std::stoi(it->second);
  };
  auto getd = [&](const char* key, double& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = std::stod(it->second);
  };
  geti("n_images", s.n_images);
  geti("image_width", s.image_width);
  geti("image_height", s.image_height);
  geti("blobs_min", s.blobs_min);
  geti("blobs_max", s.blobs_max);
  geti("observers", s.observers);
  getd("center_sigma", s.center_sigma);
  getd("noise_sigma", s.noise_sigma);
  getd("blob_radius_min", s.blob_radius_min);
  getd("blob_radius_max", s.blob_radius_max);
  getd("dt_min", s.dt_min);
  getd("dt_max", s.dt_max);
  if (auto it = kv.find("seed"); it != kv.end()) s.seed = std::stoull(it->second);
  validate_spec(s);
  return s;
}

namespace {

struct Blob {
  double x, y, intensity, radius;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  SyntheticDataset ds;
  const int w = spec.image_width, h = spec.image_height;

  for (int i = 0; i < spec.n_images; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%04d", i);
    ds.image_ids.emplace_back(name);

    Rng rng(derive_seed(spec.seed, "synth_image", static_cast<std::uint64_t>(i)));
    const int n_blobs = rng.uniform_int(spec.blobs_min, spec.blobs_max);
    std::vector<Blob> blobs(static_cast<size_t>(n_blobs));
    for (Blob& b : blobs) {
      b.x = std::clamp(rng.normal(0.5, spec.center_sigma), 0.08, 0.92);
      b.y = std::clamp(rng.normal(0.5, spec.center_sigma), 0.08, 0.92);
      b.intensity = rng.uniform(0.4, 1.0);
      b.radius = rng.uniform(spec.blob_radius_min, spec.blob_radius_max);
    }
    std::sort(blobs.begin(), blobs.end(),
              [](const Blob& a, const Blob& b) { return a.intensity > b.intensity; });

    SaliencyMap img(w, h);
    double peak = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double px = (x + 0.5) / w;
        const double py = (y + 0.5) / h;
        double v = 0.0;
        for (const Blob& b : blobs) {
          const double d2 = (px - b.x) * (px - b.x) + (py - b.y) * (py - b.y);
          v += b.intensity * std::exp(-d2 / (2.0 * b.radius * b.radius));
        }
        img.at(y, x) = v;
        peak = std::max(peak, v);
      }
    }
    // quantize so the in-memory dataset matches its on-disk PGM form exactly
    SaliencyMap sal = img;
    for (size_t k = 0; k < img.values.size(); ++k) {
      img.values[k] = static_cast<double>(std::lround(clamp01(img.values[k]) * ds.maxval));
      sal.values[k] = static_cast<double>(std::lround(sal.values[k] / peak * ds.maxval));
    }
    ds.images.push_back(std::move(img));
    ds.saliency.push_back(std::move(sal));

    for (int o = 0; o < spec.observers; ++o) {
      Rng orng(derive_seed(spec.seed, "synth_observer", static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(o)));
      Scanpath sp;
      sp.image_id = name;
      sp.observer_id = "obs" + std::to_string(o);
      // viewing starts near the center, then visits blobs by decreasing
      // intensity
      std::vector<std::pair<double, double>> stops;
      stops.emplace_back(0.5, 0.5);
      for (const Blob& b : blobs) stops.emplace_back(b.x, b.y);
      double t = 0.0;
      for (const auto& [sx, sy] : stops) {
        Fixation f;
        f.x = clamp01(sx + orng.normal(0.0, spec.noise_sigma));
        f.y = clamp01(sy + orng.normal(0.0, spec.noise_sigma));
        f.t = t;
        t += orng.uniform(spec.dt_min, spec.dt_max);
        sp.fixations.push_back(f);
      }
      validate_scanpath(sp);
      ds.scanpaths.push_back(std::move(sp));
    }
  }
  return ds;
}

void write_synthetic(const SyntheticDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "saliency");
  for (size_t i = 0; i < ds.image_ids.size(); ++i) {
    write_pgm((fs::path(dir) / "images" / (ds.image_ids[i] + ".pgm")).string(), ds.images[i],
              ds.maxval);
    write_pgm((fs::path(dir) / "saliency" / (ds.image_ids[i] + ".pgm")).string(), ds.saliency[i],
              ds.maxval);
  }
  write_scanpaths_planar((fs::path(dir) / "scanpaths.jsonl").string(), ds.scanpaths);
}

}  // namespace pathgan
