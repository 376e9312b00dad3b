#include "pathgan/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "pathgan/error.hpp"

namespace pathgan {

namespace {

// Classic potentials-based Hungarian, O(rows^2 * cols), requires rows <= cols.
// Returns (optimal total, column of each row).
std::pair<double, std::vector<int>> solve_rows(const Matrix& a) {
  const int n = a.rows, m = a.cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j]) col_of_row[p[j] - 1] = j - 1;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += a.at(i, col_of_row[i]);
  return {total, col_of_row};
}

double optimal_value(const Matrix& a) {
  if (a.rows == 0 || a.cols == 0) return 0.0;
  if (a.rows <= a.cols) return solve_rows(a).first;
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  }
  return solve_rows(t).first;
}

Matrix submatrix(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix s(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < cols.size(); ++j) s.at(static_cast<int>(i), static_cast<int>(j)) = a.at(rows[i], cols[j]);
  }
  return s;
}

bool close(double x, double y) { return std::fabs(x - y) <= 1e-9 * (1.0 + std::fabs(y)); }

}  // namespace

Assignment hungarian(const Matrix& cost) {
  const int n = cost.rows, m = cost.cols;
  if (n == 0 || m == 0) fail(Err::ShapeMismatch, "empty cost matrix");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!std::isfinite(cost.at(i, j))) {
        fail(Err::NonFiniteCost, "cell (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }

  const double best = optimal_value(cost);
  const int k = std::min(n, m);

  // Canonicalize ties: walk rows in order, fixing for each the smallest
  // column that still admits an optimal completion. Each feasibility probe is
  // one solve on the remaining submatrix; matrices here are small.
  Assignment out;
  std::vector<int> free_cols(m);
  for (int j = 0; j < m; ++j) free_cols[j] = j;
  double fixed_cost = 0.0;
  for (int r = 0; r < n && static_cast<int>(out.pairs.size()) < k; ++r) {
    const int needed = k - static_cast<int>(out.pairs.size());
    std::vector<int> rows_below;
    for (int i = r + 1; i < n; ++i) rows_below.push_back(i);

    bool placed = false;
    for (size_t ci = 0; ci < free_cols.size() && !placed; ++ci) {
      const int c = free_cols[ci];
      std::vector<int> rest_cols;
      for (int cc : free_cols) {
        if (cc != c) rest_cols.push_back(cc);
      }
      double completion = 0.0;
      if (needed > 1) completion = optimal_value(submatrix(cost, rows_below, rest_cols));
      if (close(fixed_cost + cost.at(r, c) + completion, best)) {
        out.pairs.emplace_back(r, c);
        fixed_cost += cost.at(r, c);
        free_cols.erase(free_cols.begin() + static_cast<long>(ci));
        placed = true;
      }
    }
    // Row r stays unmatched (only possible when rows outnumber columns).
    if (!placed && static_cast<int>(rows_below.size()) < needed) {
      fail(Err::NonFiniteCost, "internal: no optimal completion found");  // unreachable
    }
  }

  out.total_cost = 0.0;
  for (const auto& [r, c] : out.pairs) out.total_cost += cost.at(r, c);
  return out;
}

std::pair<Assignment, double> match_scanpaths(const std::vector<Scanpath>& generated,
                                              const std::vector<Scanpath>& gt, const Geometry& g) {
  if (generated.empty() || gt.empty()) fail(Err::ShapeMismatch, "need >=1 scanpath on each side");
  const std::string& id = gt.front().image_id;
  for (const Scanpath& sp : generated) {
    if (sp.image_id != id) fail(Err::MixedImageIds, "'" + sp.image_id + "' vs '" + id + "'");
  }
  for (const Scanpath& sp : gt) {
    if (sp.image_id != id) fail(Err::MixedImageIds, "'" + sp.image_id + "' vs '" + id + "'");
  }

  Matrix cost(static_cast<int>(generated.size()), static_cast<int>(gt.size()));
  for (size_t i = 0; i < generated.size(); ++i) {
    for (size_t j = 0; j < gt.size(); ++j) {
      cost.at(static_cast<int>(i), static_cast<int>(j)) =
          jarodzka_score(generated[i], gt[j], g).value;
    }
  }
  Assignment a = hungarian(cost);
  const double mean = a.total_cost / static_cast<double>(a.pairs.size());
  return {std::move(a), mean};
}

namespace {

int eval_thread_count(size_t n_images) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("SCANPATH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = static_cast<unsigned>(v);
  }
  return static_cast<int>(std::min<size_t>(hw, n_images));
}

}  // namespace

EvalReport evaluate_dataset(const PredSource& predictions, const GtSet& gt, int k,
                            const Geometry& g) {
  if (gt.empty()) fail(Err::ShapeMismatch, "empty ground-truth set");
  std::vector<const GtSet::value_type*> items;
  items.reserve(gt.size());
  for (const auto& kv : gt) items.push_back(&kv);

  std::vector<double> costs(items.size(), 0.0);
  std::vector<int> counts(items.size(), 0);
  std::exception_ptr error;
  std::mutex error_mu;

  const int workers = eval_thread_count(items.size());
  auto run = [&](size_t begin, size_t step) {
    for (size_t i = begin; i < items.size(); i += step) {
      try {
        const std::string& id = items[i]->first;
        std::vector<Scanpath> preds = predictions(id, k);
        if (preds.empty()) fail(Err::MissingPredictions, "image '" + id + "'");
        costs[i] = match_scanpaths(preds, items[i]->second, g).second;
        counts[i] = static_cast<int>(preds.size());
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, static_cast<size_t>(w), static_cast<size_t>(workers));
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  EvalReport r;
  r.geometry = g.kind == GeometryKind::Planar ? "planar" : "spherical";
  double sum = 0.0;
  int max_count = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    r.per_image.emplace_back(items[i]->first, costs[i]);
    sum += costs[i];
    max_count = std::max(max_count, counts[i]);
  }
  r.overall_mean = sum / static_cast<double>(items.size());
  r.n_generated_per_image = max_count;
  return r;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["overall_mean"] = r.overall_mean;
  j["n_generated_per_image"] = r.n_generated_per_image;
  j["geometry"] = r.geometry;
  j["aggregation"] = r.aggregation;
  nlohmann::ordered_json per;
  for (const auto& [id, cost] : r.per_image) per[id] = cost;
  j["per_image"] = per;
  return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& r) {
  std::string out = "image_id,mean_cost\n";
  char buf[64];
  for (const auto& [id, cost] : r.per_image) {
    std::snprintf(buf, sizeof(buf), "%.17g", cost);
    out += id;
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace pathgan
