#include "pathgan/jarodzka.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pathgan/error.hpp"

namespace pathgan {

namespace {

double saccade_cell(const SaccadeVector& u, const SaccadeVector& v, const Geometry& g) {
  if (g.kind == GeometryKind::Planar) {
    return std::hypot(u.dx - v.dx, u.dy - v.dy);
  }
  return 0.5 * (distance(g, u.start, v.start) + distance(g, u.end, v.end));
}

// Unsigned angle between the two saccade directions, in [0, pi]. Zero-length
// saccades have no direction and contribute 0.
double direction_angle(const SaccadeVector& u, const SaccadeVector& v, const Geometry& g) {
  if (u.amplitude == 0.0 || v.amplitude == 0.0) return 0.0;
  if (g.kind == GeometryKind::Planar) {
    const double cross = u.dx * v.dy - u.dy * v.dx;
    const double dot = u.dx * v.dx + u.dy * v.dy;
    return std::atan2(std::fabs(cross), dot);
  }
  double d = std::fabs(u.direction - v.direction);
  d = std::fmod(d, 2.0 * std::numbers::pi);
  if (d > std::numbers::pi) d = 2.0 * std::numbers::pi - d;
  return d;
}

}  // namespace

Matrix dissimilarity_matrix(const std::vector<SaccadeVector>& a,
                            const std::vector<SaccadeVector>& b, const Geometry& g) {
  if (a.empty() || b.empty()) fail(Err::EmptySaccadeList, "dissimilarity matrix needs >=1 saccade per path");
  Matrix m(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      m.at(static_cast<int>(i), static_cast<int>(j)) = saccade_cell(a[i], b[j], g);
    }
  }
  return m;
}

AlignmentPath align(const Matrix& m) {
  const int n = m.rows, c = m.cols;
  Matrix d(n, c);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < c; ++j) {
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else if (i == 0) {
        best = d.at(0, j - 1);
      } else if (j == 0) {
        best = d.at(i - 1, 0);
      } else {
        best = std::min({d.at(i - 1, j - 1), d.at(i - 1, j), d.at(i, j - 1)});
      }
      d.at(i, j) = m.at(i, j) + best;
    }
  }

  AlignmentPath path;
  int i = n - 1, j = c - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      // recompute the predecessor minimum instead of subtracting, so the
      // comparison is exact; ties pick diagonal, then vertical
      const double diag = d.at(i - 1, j - 1);
      const double vert = d.at(i - 1, j);
      const double horz = d.at(i, j - 1);
      const double best = std::min({diag, vert, horz});
      if (diag == best) {
        --i;
        --j;
      } else if (vert == best) {
        --i;
      } else {
        --j;
      }
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

MeasureSet component_measures(const Scanpath& a, const Scanpath& b, const AlignmentPath& path,
                              const Geometry& g) {
  const std::vector<SaccadeVector> sa = saccades(a, g);
  const std::vector<SaccadeVector> sb = saccades(b, g);
  const std::vector<double> da = durations(a);
  const std::vector<double> db = durations(b);

  const int n = static_cast<int>(sa.size());
  const int m = static_cast<int>(sb.size());
  if (path.pairs.empty() || path.pairs.front() != std::make_pair(0, 0) ||
      path.pairs.back() != std::make_pair(n - 1, m - 1)) {
    fail(Err::InvalidAlignment, "path does not span the saccade sequences");
  }
  for (size_t k = 0; k + 1 < path.pairs.size(); ++k) {
    const int di = path.pairs[k + 1].first - path.pairs[k].first;
    const int dj = path.pairs[k + 1].second - path.pairs[k].second;
    const bool step_ok = (di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1);
    if (!step_ok) fail(Err::InvalidAlignment, "non-monotone step in alignment");
  }

  const double big_d = g.normalizer();
  MeasureSet ms;
  for (const auto& [i, j] : path.pairs) {
    const SaccadeVector& u = sa[i];
    const SaccadeVector& v = sb[j];
    ms.shape += saccade_cell(u, v, g) / (2.0 * big_d);
    ms.amplitude += std::fabs(u.amplitude - v.amplitude) / big_d;
    ms.direction += direction_angle(u, v, g) / std::numbers::pi;
    ms.position += distance(g, u.end, v.end) / big_d;
    const double du = da[i + 1], dv = db[j + 1];
    const double dmax = std::max(du, dv);
    ms.duration += dmax > 0.0 ? std::fabs(du - dv) / dmax : 0.0;
  }
  const double cnt = static_cast<double>(path.pairs.size());
  ms.shape /= cnt;
  ms.amplitude /= cnt;
  ms.direction /= cnt;
  ms.position /= cnt;
  ms.duration /= cnt;
  return ms;
}

JarodzkaScore jarodzka_score(const Scanpath& a, const Scanpath& b, const Geometry& g,
                             const JarodzkaWeights& w) {
  validate_scanpath(a);
  validate_scanpath(b);

  JarodzkaScore score;
  if (a.size() < 2 || b.size() < 2) {
    // Position-only fallback: align the fixation-distance matrix directly.
    Matrix m(static_cast<int>(a.size()), static_cast<int>(b.size()));
    for (size_t i = 0; i < a.size(); ++i) {
      for (size_t j = 0; j < b.size(); ++j) {
        m.at(static_cast<int>(i), static_cast<int>(j)) =
            distance(g, a.fixations[i], b.fixations[j]);
      }
    }
    score.alignment = align(m);
    double sum = 0.0;
    for (const auto& [i, j] : score.alignment.pairs) sum += m.at(i, j);
    score.value = sum / static_cast<double>(score.alignment.pairs.size()) / g.normalizer();
    score.components.position = score.value;
    return score;
  }

  const std::vector<SaccadeVector> sa = saccades(a, g);
  const std::vector<SaccadeVector> sb = saccades(b, g);
  const Matrix m = dissimilarity_matrix(sa, sb, g);
  score.alignment = align(m);
  score.components = component_measures(a, b, score.alignment, g);

  const double wsum = w.shape + w.amplitude + w.direction + w.position + w.duration;
  score.value = (w.shape * score.components.shape + w.amplitude * score.components.amplitude +
                 w.direction * score.components.direction + w.position * score.components.position +
                 w.duration * score.components.duration) /
                wsum;
  return score;
}

}  // namespace pathgan
