#pragma once

#include <utility>
#include <vector>

#include "pathgan/matrix.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

// Monotone alignment between two saccade sequences: starts at (0,0), ends at
// (n-1,m-1), each step advances by (1,0), (0,1) or (1,1).
struct AlignmentPath {
  std::vector<std::pair<int, int>> pairs;
};

// Five normalized dissimilarity components, each in [0,1], 0 = identical.
struct MeasureSet {
  double shape = 0.0;
  double amplitude = 0.0;
  double direction = 0.0;
  double position = 0.0;
  double duration = 0.0;
};

struct JarodzkaWeights {
  double shape = 1.0;
  double amplitude = 1.0;
  double direction = 1.0;
  double position = 1.0;
  double duration = 1.0;
};

struct JarodzkaScore {
  double value = 0.0;  // weighted mean of the components, in [0,1]; lower is better
  MeasureSet components;
  AlignmentPath alignment;
};

// Pairwise saccade dissimilarity. Planar: norm of the displacement
// difference. Spherical: mean of the central angles between the two start
// points and the two end points.
Matrix dissimilarity_matrix(const std::vector<SaccadeVector>& a,
                            const std::vector<SaccadeVector>& b, const Geometry& g);

// Cheapest monotone path through M by dynamic programming, cost of (0,0)
// included. Ties prefer diagonal, then vertical, then horizontal moves.
AlignmentPath align(const Matrix& m);

// Component measures averaged over the aligned saccade pairs. Durations are
// those of the fixations each saccade lands on.
MeasureSet component_measures(const Scanpath& a, const Scanpath& b, const AlignmentPath& path,
                              const Geometry& g);

// Full metric. Paths with a single fixation fall back to a position-only
// score: the same alignment applied to the fixation-distance matrix, averaged
// and divided by the geometry normalizer.
JarodzkaScore jarodzka_score(const Scanpath& a, const Scanpath& b, const Geometry& g,
                             const JarodzkaWeights& w = {});

}  // namespace pathgan
