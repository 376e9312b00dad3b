#pragma once

#include <string>
#include <vector>

namespace pathgan {

// One gaze dwell: normalized image coordinates plus onset time in seconds.
struct Fixation {
  double x = 0.0;  // [0,1], left to right
  double y = 0.0;  // [0,1], top to bottom
  double t = 0.0;  // seconds, >= 0
};

struct Scanpath {
  std::string image_id;
  std::string observer_id;  // empty when unknown
  std::vector<Fixation> fixations;

  size_t size() const { return fixations.size(); }
};

enum class GeometryKind { Planar, Spherical };

// Distance model for a dataset. The normalizer is the largest attainable
// point distance (unit-square diagonal, or the angle between antipodes), so
// normalized metric components land in [0,1].
struct Geometry {
  GeometryKind kind = GeometryKind::Planar;

  double normalizer() const;
  static Geometry planar() { return {GeometryKind::Planar}; }
  static Geometry spherical() { return {GeometryKind::Spherical}; }
};

// Equirectangular convention: x spans longitude left to right, y spans
// latitude top to bottom.
struct SpherePoint {
  double lon = 0.0;  // [-pi, pi)
  double lat = 0.0;  // [-pi/2, pi/2]
};

SpherePoint to_sphere(const Fixation& f);

// Displacement between consecutive fixations. For planar geometry dx/dy hold
// the displacement vector; for spherical geometry the amplitude is the
// central angle and the direction is the initial great-circle bearing.
struct SaccadeVector {
  Fixation start;
  Fixation end;
  double dx = 0.0;
  double dy = 0.0;
  double amplitude = 0.0;
  double direction = 0.0;
};

// Returns sp unchanged; throws EmptyScanpath, CoordinateOutOfRange (with the
// offending index) or NonMonotoneTimestamps otherwise. Out-of-range
// coordinates are a hard error: clamping here would mask loader bugs.
const Scanpath& validate_scanpath(const Scanpath& sp);

// Planar: Euclidean distance in the unit square. Spherical: central angle in
// radians, evaluated with the two-argument arctangent form (stable near 0 and
// near antipodes).
double distance(const Geometry& g, const Fixation& a, const Fixation& b);

// len(sp)-1 vectors between consecutive fixations; empty for a single
// fixation.
std::vector<SaccadeVector> saccades(const Scanpath& sp, const Geometry& g);

inline constexpr double kDefaultFixationDuration = 0.25;  // seconds

// Per-fixation dwell times derived from onset timestamps: duration_i =
// t_{i+1} - t_i, the last one the mean of the others (the data stores onsets
// only), and a single-fixation path gets the default.
std::vector<double> durations(const Scanpath& sp);

}  // namespace pathgan
