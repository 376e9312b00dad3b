#include "pathgan/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "pathgan/error.hpp"

namespace pathgan {

void validate_config(const BaselineConfig& cfg) {
  if (cfg.len_min < 1 || cfg.len_min > cfg.len_max) {
    fail(Err::ValidationError, "fixation count bounds must satisfy 1 <= len_min <= len_max");
  }
  if (!(cfg.dt_min > 0.0) || cfg.dt_min > cfg.dt_max) {
    fail(Err::ValidationError, "interval bounds must satisfy 0 < dt_min <= dt_max");
  }
}

namespace {

void append_timestamps(Scanpath& sp, const BaselineConfig& cfg, Rng& rng) {
  double t = 0.0;
  for (size_t i = 0; i < sp.fixations.size(); ++i) {
    sp.fixations[i].t = t;
    t += rng.uniform(cfg.dt_min, cfg.dt_max);
  }
}

Scanpath random_positions(const std::string& image_id, int n, const BaselineConfig& cfg,
                          Rng& rng) {
  Scanpath sp;
  sp.image_id = image_id;
  sp.fixations.resize(static_cast<size_t>(n));
  for (Fixation& f : sp.fixations) {
    f.x = rng.uniform();
    f.y = rng.uniform();
  }
  append_timestamps(sp, cfg, rng);
  return sp;
}

}  // namespace

Scanpath baseline_random(const std::string& image_id, const BaselineConfig& cfg, Rng& rng) {
  validate_config(cfg);
  const int n = rng.uniform_int(cfg.len_min, cfg.len_max);
  return random_positions(image_id, n, cfg, rng);
}

Scanpath baseline_random_gt_count(const Scanpath& gt, const BaselineConfig& cfg, Rng& rng) {
  validate_config(cfg);
  validate_scanpath(gt);
  return random_positions(gt.image_id, static_cast<int>(gt.size()), cfg, rng);
}

Scanpath baseline_saliency_sampling(const std::string& image_id, const SaliencyMap& map, int n,
                                    const BaselineConfig& cfg, Rng& rng) {
  validate_config(cfg);
  if (n < 1) fail(Err::EmptyScanpath, "cannot sample an empty scanpath (n=" + std::to_string(n) + ")");
  double total = 0.0;
  for (double v : map.values) {
    if (v < 0.0 || !std::isfinite(v)) fail(Err::ValidationError, "saliency values must be finite and >= 0");
    total += v;
  }
  if (!(total > 0.0)) fail(Err::AllZeroSaliencyMap, "map has no positive mass");

  std::vector<double> cdf(map.values.size());
  double acc = 0.0;
  for (size_t i = 0; i < map.values.size(); ++i) {
    acc += map.values[i];
    cdf[i] = acc;
  }

  Scanpath sp;
  sp.image_id = image_id;
  sp.fixations.resize(static_cast<size_t>(n));
  for (Fixation& f : sp.fixations) {
    const double u = rng.uniform() * total;
    const size_t idx = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const size_t p = std::min(idx, map.values.size() - 1);
    const int row = static_cast<int>(p) / map.width;
    const int col = static_cast<int>(p) % map.width;
    f.x = (col + 0.5) / map.width;
    f.y = (row + 0.5) / map.height;
  }
  append_timestamps(sp, cfg, rng);
  return sp;
}

std::map<std::string, std::vector<Scanpath>> baseline_interchange(
    const std::map<std::string, std::vector<Scanpath>>& gt_set, Rng& rng) {
  const size_t n = gt_set.size();
  if (n < 2) fail(Err::TooFewImages, "interchange needs >= 2 images");

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& [id, _] : gt_set) ids.push_back(id);

  // Uniform derangement via rejection (expected ~e attempts).
  std::vector<size_t> perm(n);
  bool ok = false;
  while (!ok) {
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t i = n; i > 1; --i) {
      const size_t j = rng.below(i);
      std::swap(perm[i - 1], perm[j]);
    }
    ok = true;
    for (size_t i = 0; i < n; ++i) {
      if (perm[i] == i) {
        ok = false;
        break;
      }
    }
  }

  std::map<std::string, std::vector<Scanpath>> out;
  for (size_t i = 0; i < n; ++i) {
    std::vector<Scanpath> paths = gt_set.at(ids[perm[i]]);
    for (Scanpath& sp : paths) sp.image_id = ids[i];
    out[ids[i]] = std::move(paths);
  }
  return out;
}

}  // namespace pathgan
