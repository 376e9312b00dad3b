#pragma once

#include <vector>

#include "pathgan/scanpath.hpp"

namespace pathgan {

// B x B grid of fixation-position probabilities (row-major, sums to 1).
struct SpatialHistogram {
  int bins = 0;
  std::vector<double> p;

  double at(int row, int col) const { return p[static_cast<size_t>(row) * bins + col]; }
};

SpatialHistogram spatial_histogram(const std::vector<Scanpath>& scanpaths, int bins = 16);

// KL(P || Q) in nats after epsilon-smoothing and renormalizing both sides.
double divergence(const SpatialHistogram& p, const SpatialHistogram& q, double smoothing = 1e-6);

SpatialHistogram uniform_histogram(int bins = 16);

}  // namespace pathgan
