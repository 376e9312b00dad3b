// Test-only oracles, deliberately independent of the library's
// implementations: exhaustive enumeration for alignments and assignments, and
// a straight-line re-derivation of the vector metric.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "pathgan/matrix.hpp"
#include "pathgan/scanpath.hpp"

namespace oracles {

// Minimum cost over every monotone path from (0,0) to (n-1,m-1); optionally
// the first minimal path in (diag, down, right) recursion order.
inline void enum_paths_rec(const pathgan::Matrix& m, int i, int j, double acc,
                           std::vector<std::pair<int, int>>& cur, double& best,
                           std::vector<std::pair<int, int>>& best_path) {
  acc += m.at(i, j);
  cur.emplace_back(i, j);
  if (i == m.rows - 1 && j == m.cols - 1) {
    if (acc < best) {
      best = acc;
      best_path = cur;
    }
  } else {
    if (i + 1 < m.rows && j + 1 < m.cols) enum_paths_rec(m, i + 1, j + 1, acc, cur, best, best_path);
    if (i + 1 < m.rows) enum_paths_rec(m, i + 1, j, acc, cur, best, best_path);
    if (j + 1 < m.cols) enum_paths_rec(m, i, j + 1, acc, cur, best, best_path);
  }
  cur.pop_back();
}

inline double min_monotone_path_cost(const pathgan::Matrix& m,
                                     std::vector<std::pair<int, int>>* path = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, int>> cur, best_path;
  enum_paths_rec(m, 0, 0, 0.0, cur, best, best_path);
  if (path) *path = best_path;
  return best;
}

// Minimum assignment cost over all injective row->column maps of size
// min(n,m). Feasible for min(n,m) <= 8.
inline void enum_assign_rec(const pathgan::Matrix& m, int row, int placed, int k,
                            std::vector<char>& used, double acc, double& best) {
  if (placed == k) {
    best = std::min(best, acc);
    return;
  }
  if (row >= m.rows) return;
  if (m.rows - row > k - placed) {
    enum_assign_rec(m, row + 1, placed, k, used, acc, best);  // skip this row
  }
  for (int c = 0; c < m.cols; ++c) {
    if (used[c]) continue;
    used[c] = 1;
    enum_assign_rec(m, row + 1, placed + 1, k, used, acc + m.at(row, c), best);
    used[c] = 0;
  }
}

inline double brute_force_assignment(const pathgan::Matrix& m) {
  const int k = std::min(m.rows, m.cols);
  std::vector<char> used(static_cast<size_t>(m.cols), 0);
  double best = std::numeric_limits<double>::infinity();
  enum_assign_rec(m, 0, 0, k, used, 0.0, best);
  return best;
}

// Independent planar re-derivation of the five-component score for paths with
// >= 2 fixations each (unique-optimum inputs assumed).
inline double jarodzka_planar_oracle(const pathgan::Scanpath& a, const pathgan::Scanpath& b) {
  auto disp = [](const pathgan::Scanpath& s) {
    std::vector<std::array<double, 2>> v;
    for (size_t i = 0; i + 1 < s.fixations.size(); ++i) {
      v.push_back({s.fixations[i + 1].x - s.fixations[i].x,
                   s.fixations[i + 1].y - s.fixations[i].y});
    }
    return v;
  };
  auto durs = [](const pathgan::Scanpath& s) {
    std::vector<double> d;
    double sum = 0.0;
    for (size_t i = 0; i + 1 < s.fixations.size(); ++i) {
      d.push_back(s.fixations[i + 1].t - s.fixations[i].t);
      sum += d.back();
    }
    d.push_back(sum / static_cast<double>(d.size()));
    return d;
  };
  const auto du = disp(a), dv = disp(b);
  const auto da = durs(a), db = durs(b);
  const int n = static_cast<int>(du.size()), m = static_cast<int>(dv.size());

  pathgan::Matrix cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      cost.at(i, j) = std::hypot(du[i][0] - dv[j][0], du[i][1] - dv[j][1]);
    }
  }
  std::vector<std::pair<int, int>> path;
  min_monotone_path_cost(cost, &path);

  const double rt2 = std::sqrt(2.0);
  const double pi = std::acos(-1.0);
  double shape = 0, amp = 0, dir = 0, pos = 0, dur = 0;
  for (const auto& [i, j] : path) {
    shape += std::hypot(du[i][0] - dv[j][0], du[i][1] - dv[j][1]) / (2.0 * rt2);
    const double lu = std::hypot(du[i][0], du[i][1]);
    const double lv = std::hypot(dv[j][0], dv[j][1]);
    amp += std::fabs(lu - lv) / rt2;
    if (lu > 0 && lv > 0) {
      const double cross = du[i][0] * dv[j][1] - du[i][1] * dv[j][0];
      const double dot = du[i][0] * dv[j][0] + du[i][1] * dv[j][1];
      dir += std::atan2(std::fabs(cross), dot) / pi;
    }
    pos += std::hypot(a.fixations[i + 1].x - b.fixations[j + 1].x,
                      a.fixations[i + 1].y - b.fixations[j + 1].y) /
           rt2;
    const double mx = std::max(da[i + 1], db[j + 1]);
    if (mx > 0) dur += std::fabs(da[i + 1] - db[j + 1]) / mx;
  }
  const double cnt = static_cast<double>(path.size());
  return (shape + amp + dir + pos + dur) / (5.0 * cnt);
}

}  // namespace oracles
