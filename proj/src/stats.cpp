#include "pathgan/stats.hpp"

#include <algorithm>
#include <cmath>

#include "pathgan/error.hpp"

namespace pathgan {

SpatialHistogram spatial_histogram(const std::vector<Scanpath>& scanpaths, int bins) {
  if (bins < 1) fail(Err::ValidationError, "bins must be >= 1");
  SpatialHistogram h;
  h.bins = bins;
  h.p.assign(static_cast<size_t>(bins) * bins, 0.0);
  size_t count = 0;
  for (const Scanpath& sp : scanpaths) {
    for (const Fixation& f : sp.fixations) {
      // x=1 / y=1 land in the last cell
      const int col = std::min(bins - 1, static_cast<int>(f.x * bins));
      const int row = std::min(bins - 1, static_cast<int>(f.y * bins));
      h.p[static_cast<size_t>(row) * bins + col] += 1.0;
      ++count;
    }
  }
  if (count == 0) fail(Err::NoFixations, "histogram needs at least one fixation");
  for (double& v : h.p) v /= static_cast<double>(count);
  return h;
}

double divergence(const SpatialHistogram& p, const SpatialHistogram& q, double smoothing) {
  if (p.bins != q.bins) {
    fail(Err::BinMismatch, std::to_string(p.bins) + " vs " + std::to_string(q.bins));
  }
  const size_t n = p.p.size();
  double psum = 0.0, qsum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    psum += p.p[i] + smoothing;
    qsum += q.p[i] + smoothing;
  }
  double kl = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pi = (p.p[i] + smoothing) / psum;
    const double qi = (q.p[i] + smoothing) / qsum;
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

SpatialHistogram uniform_histogram(int bins) {
  SpatialHistogram h;
  h.bins = bins;
  h.p.assign(static_cast<size_t>(bins) * bins, 1.0 / (static_cast<double>(bins) * bins));
  return h;
}

}  // namespace pathgan
