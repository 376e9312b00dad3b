#include "pathgan/nn/rmsprop.hpp"

#include <cmath>

#include "pathgan/error.hpp"

namespace pathgan {

void rmsprop_step(std::span<double> theta, std::span<const double> grad, std::span<double> acc,
                  const RmspropConfig& cfg) {
  if (theta.size() != grad.size() || theta.size() != acc.size()) {
    fail(Err::ShapeMismatch, "rmsprop buffers disagree: " + std::to_string(theta.size()) + "/" +
                                 std::to_string(grad.size()) + "/" + std::to_string(acc.size()));
  }
  for (size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    acc[i] = cfg.rho * acc[i] + (1.0 - cfg.rho) * g * g;
    theta[i] -= cfg.lr * g / (std::sqrt(acc[i]) + cfg.eps);
  }
}

Rmsprop::Rmsprop(const RmspropConfig& cfg, const ParamStore& params, std::string prefix)
    : cfg_(cfg), prefix_(std::move(prefix)) {
  for (const std::string& name : params.names()) {
    if (name.rfind(prefix_, 0) == 0 && params.trainable(name)) {
      acc_.add(name, params.at(name).shape);
    }
  }
}

void Rmsprop::step(ParamStore& params, const ParamStore& grads) {
  for (const std::string& name : acc_.names()) {
    Array& theta = params.at(name);
    const Array& g = grads.at(name);
    Array& acc = acc_.at(name);
    rmsprop_step(theta.data, g.data, acc.data, cfg_);
  }
  ++steps_;
}

}  // namespace pathgan
