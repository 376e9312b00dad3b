#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pathgan/jarodzka.hpp"
#include "pathgan/matrix.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double total_cost = 0.0;
};

// Exact minimum-cost assignment of min(n,m) pairs on a rectangular matrix.
// Deterministic: among optimal assignments, returns the one whose
// row-sorted pair list is lexicographically smallest (lowest row index,
// then lowest column index).
Assignment hungarian(const Matrix& cost);

// Paper evaluation protocol for one image: Jarodzka cost matrix between the
// generated and ground-truth scanpaths, Hungarian 1-to-1 matching, mean cost
// over the matched pairs.
std::pair<Assignment, double> match_scanpaths(const std::vector<Scanpath>& generated,
                                              const std::vector<Scanpath>& gt, const Geometry& g);

struct EvalReport {
  std::vector<std::pair<std::string, double>> per_image;  // image_id -> mean matched cost
  double overall_mean = 0.0;                              // unweighted mean over images
  int n_generated_per_image = 0;
  std::string geometry;
  // Aggregation order is a protocol choice, echoed so reports are comparable.
  std::string aggregation = "mean_over_matched_pairs_then_images";
};

using GtSet = std::map<std::string, std::vector<Scanpath>>;

// Prediction provider: returns up to k scanpaths for an image (generator,
// baseline, or file-backed). An empty result is a MissingPredictions error.
using PredSource = std::function<std::vector<Scanpath>(const std::string& image_id, int k)>;

// Evaluates every image in gt. Images are processed in parallel
// (SCANPATH_THREADS caps the worker count); aggregation is ordered by
// image_id so reports are deterministic.
EvalReport evaluate_dataset(const PredSource& predictions, const GtSet& gt, int k,
                            const Geometry& g);

std::string report_json(const EvalReport& r);
std::string report_csv(const EvalReport& r);

}  // namespace pathgan
