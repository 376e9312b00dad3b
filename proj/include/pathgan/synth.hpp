#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pathgan/image.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

// Procedural stand-in dataset: blob images, center-biased blob-seeking
// observers, and matching saliency maps. Fully seeded.
struct SyntheticSpec {
  int n_images = 200;
  int image_width = 64;
  int image_height = 64;
  int blobs_min = 2;
  int blobs_max = 4;
  int observers = 3;
  double center_sigma = 0.16;   // blob placement spread around the image center
  double noise_sigma = 0.02;    // per-observer fixation jitter
  double blob_radius_min = 0.06;
  double blob_radius_max = 0.14;
  double dt_min = 0.15;  // seconds between fixations
  double dt_max = 0.35;
  std::uint64_t seed = 1;
};

void validate_spec(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_map(const std::map<std::string, std::string>& kv);

struct SyntheticDataset {
  std::vector<std::string> image_ids;
  std::vector<SaliencyMap> images;    // grayscale pixels, already quantized to [0, 65535]
  std::vector<SaliencyMap> saliency;  // blob mixture, quantized like the images
  std::vector<Scanpath> scanpaths;
  int maxval = 65535;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Layout: <dir>/images/<id>.pgm, <dir>/saliency/<id>.pgm, <dir>/scanpaths.jsonl
void write_synthetic(const SyntheticDataset& ds, const std::string& dir);

}  // namespace pathgan
