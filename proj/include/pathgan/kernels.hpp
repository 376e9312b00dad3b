#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Double-precision inner-loop kernels behind the model's dense math. A scalar
// reference lane always exists; AVX2 (x86-64) and NEON (aarch64) lanes are
// compiled where the ISA is available and one lane is selected once per
// process. Set PATHGAN_KERNELS={scalar,avx2,neon} to force a lane.
// Transcendentals stay scalar in every lane so lanes differ only by
// summation/rounding order; equivalence tests bound that difference.

namespace pathgan::kernels {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);    // y += a*x
  void (*scale)(double, double*, std::size_t);                  // x *= a
  void (*add)(const double*, double*, std::size_t);             // y += x
  void (*hadamard)(const double*, double*, std::size_t);        // y *= x
  double (*sumsq)(const double*, std::size_t);
  const char* name;
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void hadamard(const double* x, double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
}  // namespace scalar

// Lane chosen at first use.
const KernelTable& active();
std::string_view active_lane();

// Every lane runnable on this machine, scalar first. Equivalence tests walk
// this list.
const std::vector<const KernelTable*>& available_lanes();

inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline void scale(double a, double* x, std::size_t n) { active().scale(a, x, n); }
inline void add(const double* x, double* y, std::size_t n) { active().add(x, y, n); }
inline void hadamard(const double* x, double* y, std::size_t n) { active().hadamard(x, y, n); }
inline double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }

// Row-major composites used by the recurrent and convolutional layers.

// y = A x + b, A is m x n; b may be null.
void matvec(const double* A, const double* x, const double* b, double* y, std::size_t m,
            std::size_t n);
// x_adj += A^T y
void matvec_t_acc(const double* A, const double* y, double* x_adj, std::size_t m, std::size_t n);
// A_adj += y (outer) x
void outer_acc(const double* y, const double* x, double* A_adj, std::size_t m, std::size_t n);

}  // namespace pathgan::kernels
