#include "pathgan/scanpath.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pathgan/error.hpp"

namespace pathgan {

using std::numbers::pi;

double Geometry::normalizer() const {
  return kind == GeometryKind::Planar ? std::numbers::sqrt2 : pi;
}

SpherePoint to_sphere(const Fixation& f) {
  SpherePoint p;
  p.lon = (f.x - 0.5) * 2.0 * pi;
  if (p.lon >= pi) p.lon -= 2.0 * pi;  // x=1 wraps onto x=0
  p.lat = (0.5 - f.y) * pi;
  return p;
}

const Scanpath& validate_scanpath(const Scanpath& sp) {
  if (sp.fixations.empty()) fail(Err::EmptyScanpath, "scanpath for image '" + sp.image_id + "'");
  for (size_t i = 0; i < sp.fixations.size(); ++i) {
    const Fixation& f = sp.fixations[i];
    const bool ok = std::isfinite(f.x) && std::isfinite(f.y) && f.x >= 0.0 && f.x <= 1.0 &&
                    f.y >= 0.0 && f.y <= 1.0;
    if (!ok) {
      fail(Err::CoordinateOutOfRange, "fixation " + std::to_string(i) + " at (" +
                                          std::to_string(f.x) + ", " + std::to_string(f.y) + ")");
    }
    if (!(std::isfinite(f.t) && f.t >= 0.0)) {
      fail(Err::NonMonotoneTimestamps, "fixation " + std::to_string(i) + " has invalid time " +
                                           std::to_string(f.t));
    }
    if (i > 0 && f.t < sp.fixations[i - 1].t) {
      fail(Err::NonMonotoneTimestamps, "fixation " + std::to_string(i) + ": t=" +
                                           std::to_string(f.t) + " after t=" +
                                           std::to_string(sp.fixations[i - 1].t));
    }
  }
  return sp;
}

namespace {

double central_angle(const SpherePoint& a, const SpherePoint& b) {
  const double dlon = b.lon - a.lon;
  const double sa = std::sin(a.lat), ca = std::cos(a.lat);
  const double sb = std::sin(b.lat), cb = std::cos(b.lat);
  const double y1 = cb * std::sin(dlon);
  const double y2 = ca * sb - sa * cb * std::cos(dlon);
  const double num = std::hypot(y1, y2);
  const double den = sa * sb + ca * cb * std::cos(dlon);
  return std::atan2(num, den);
}

// Initial great-circle bearing from a towards b.
double bearing(const SpherePoint& a, const SpherePoint& b) {
  const double dlon = b.lon - a.lon;
  const double y = std::sin(dlon) * std::cos(b.lat);
  const double x = std::cos(a.lat) * std::sin(b.lat) - std::sin(a.lat) * std::cos(b.lat) * std::cos(dlon);
  if (y == 0.0 && x == 0.0) return 0.0;
  return std::atan2(y, x);
}

}  // namespace

double distance(const Geometry& g, const Fixation& a, const Fixation& b) {
  if (g.kind == GeometryKind::Planar) {
    return std::hypot(a.x - b.x, a.y - b.y);
  }
  return central_angle(to_sphere(a), to_sphere(b));
}

std::vector<SaccadeVector> saccades(const Scanpath& sp, const Geometry& g) {
  std::vector<SaccadeVector> out;
  if (sp.fixations.size() < 2) return out;
  out.reserve(sp.fixations.size() - 1);
  for (size_t i = 0; i + 1 < sp.fixations.size(); ++i) {
    SaccadeVector v;
    v.start = sp.fixations[i];
    v.end = sp.fixations[i + 1];
    if (g.kind == GeometryKind::Planar) {
      v.dx = v.end.x - v.start.x;
      v.dy = v.end.y - v.start.y;
      v.amplitude = std::hypot(v.dx, v.dy);
      v.direction = (v.dx == 0.0 && v.dy == 0.0) ? 0.0 : std::atan2(v.dy, v.dx);
    } else {
      const SpherePoint s = to_sphere(v.start);
      const SpherePoint e = to_sphere(v.end);
      v.dx = v.end.x - v.start.x;
      v.dy = v.end.y - v.start.y;
      v.amplitude = central_angle(s, e);
      v.direction = bearing(s, e);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> durations(const Scanpath& sp) {
  const size_t n = sp.fixations.size();
  if (n == 1) return {kDefaultFixationDuration};
  std::vector<double> out(n, 0.0);
  double sum = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    out[i] = sp.fixations[i + 1].t - sp.fixations[i].t;
    sum += out[i];
  }
  out[n - 1] = sum / static_cast<double>(n - 1);
  return out;
}

}  // namespace pathgan
