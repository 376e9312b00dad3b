#include "pathgan/kernels.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

namespace pathgan::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void hadamard(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

double sumsq(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace scalar

static const KernelTable kScalarTable = {
    scalar::dot, scalar::axpy, scalar::scale, scalar::add, scalar::hadamard, scalar::sumsq,
    "scalar"};

#if defined(PATHGAN_BUILD_AVX2)
namespace avx2 {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void scale(double, double*, std::size_t);
void add(const double*, double*, std::size_t);
void hadamard(const double*, double*, std::size_t);
double sumsq(const double*, std::size_t);
}  // namespace avx2
static const KernelTable kAvx2Table = {avx2::dot,      avx2::axpy, avx2::scale,
                                       avx2::add,      avx2::hadamard, avx2::sumsq,
                                       "avx2"};
static bool avx2_usable() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#if defined(PATHGAN_BUILD_NEON)
namespace neon {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void scale(double, double*, std::size_t);
void add(const double*, double*, std::size_t);
void hadamard(const double*, double*, std::size_t);
double sumsq(const double*, std::size_t);
}  // namespace neon
static const KernelTable kNeonTable = {neon::dot,      neon::axpy, neon::scale,
                                       neon::add,      neon::hadamard, neon::sumsq,
                                       "neon"};
#endif

namespace {

struct Lanes {
  std::vector<const KernelTable*> available;
  const KernelTable* active = &kScalarTable;
};

const Lanes& lanes() {
  static Lanes l = [] {
    Lanes out;
    out.available.push_back(&kScalarTable);
#if defined(PATHGAN_BUILD_AVX2)
    if (avx2_usable()) out.available.push_back(&kAvx2Table);
#endif
#if defined(PATHGAN_BUILD_NEON)
    out.available.push_back(&kNeonTable);  // baseline on aarch64
#endif
    out.active = out.available.back();  // best usable lane
    if (const char* env = std::getenv("PATHGAN_KERNELS")) {
      const std::string want(env);
      for (const KernelTable* t : out.available) {
        if (want == t->name) out.active = t;
      }
    }
    return out;
  }();
  return l;
}

}  // namespace

const KernelTable& active() { return *lanes().active; }

std::string_view active_lane() { return active().name; }

const std::vector<const KernelTable*>& available_lanes() { return lanes().available; }

void matvec(const double* A, const double* x, const double* b, double* y, std::size_t m,
            std::size_t n) {
  const KernelTable& k = active();
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = k.dot(A + i * n, x, n) + (b ? b[i] : 0.0);
  }
}

void matvec_t_acc(const double* A, const double* y, double* x_adj, std::size_t m, std::size_t n) {
  const KernelTable& k = active();
  for (std::size_t i = 0; i < m; ++i) {
    if (y[i] != 0.0) k.axpy(y[i], A + i * n, x_adj, n);
  }
}

void outer_acc(const double* y, const double* x, double* A_adj, std::size_t m, std::size_t n) {
  const KernelTable& k = active();
  for (std::size_t i = 0; i < m; ++i) {
    if (y[i] != 0.0) k.axpy(y[i], x, A_adj + i * n, n);
  }
}

}  // namespace pathgan::kernels
