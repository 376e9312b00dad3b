#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathgan/image.hpp"
#include "pathgan/rng.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

struct BaselineConfig {
  int len_min = 1;
  int len_max = 35;
  double dt_min = 0.1;   // seconds
  double dt_max = 0.5;
  std::uint64_t seed = 0;
};

void validate_config(const BaselineConfig& cfg);

// (a) Random positions and number of fixations.
Scanpath baseline_random(const std::string& image_id, const BaselineConfig& cfg, Rng& rng);

// (b) Random positions, ground-truth number of fixations.
Scanpath baseline_random_gt_count(const Scanpath& gt, const BaselineConfig& cfg, Rng& rng);

// (c) i.i.d. sampling from a saliency map treated as a pixel pmf; fixations
// land on pixel centers.
Scanpath baseline_saliency_sampling(const std::string& image_id, const SaliencyMap& map, int n,
                                    const BaselineConfig& cfg, Rng& rng);

// (d) Interchanging scanpaths across images: a derangement of image ids,
// each image receiving another image's ground truth re-labeled.
std::map<std::string, std::vector<Scanpath>> baseline_interchange(
    const std::map<std::string, std::vector<Scanpath>>& gt_set, Rng& rng);

}  // namespace pathgan
