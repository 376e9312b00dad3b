#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pathgan/nn/param_store.hpp"

namespace pathgan {

struct RmspropConfig {
  double lr = 1e-4;
  double rho = 0.9;
  double eps = 1e-8;
  // no decay
};

// acc <- rho*acc + (1-rho)*g^2;  theta <- theta - lr*g / (sqrt(acc) + eps)
void rmsprop_step(std::span<double> theta, std::span<const double> grad, std::span<double> acc,
                  const RmspropConfig& cfg);

// Per-parameter accumulators for every trainable array whose name starts with
// `prefix` (one optimizer per network half).
class Rmsprop {
 public:
  Rmsprop(const RmspropConfig& cfg, const ParamStore& params, std::string prefix);

  void step(ParamStore& params, const ParamStore& grads);
  std::int64_t step_count() const { return steps_; }
  const std::string& prefix() const { return prefix_; }

  ParamStore& state() { return acc_; }
  const ParamStore& state() const { return acc_; }
  void set_step_count(std::int64_t n) { steps_ = n; }

 private:
  RmspropConfig cfg_;
  std::string prefix_;
  ParamStore acc_;
  std::int64_t steps_ = 0;
};

}  // namespace pathgan
