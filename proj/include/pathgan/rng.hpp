#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pathgan {

// mt19937_64 with hand-rolled sampling. The std::*_distribution adapters are
// implementation-defined (two standard libraries fed the same engine can
// disagree), so every draw here is pinned to the engine's documented output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased uniform integer in [0,n)
  std::uint64_t below(std::uint64_t n);

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller
  double normal(double mean = 0.0, double sigma = 1.0);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable stream derivation: mixes a master seed with a tag and up to two
// indices so any point in a run can be re-seeded from plain integers (no
// engine state needs to be persisted).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace pathgan
