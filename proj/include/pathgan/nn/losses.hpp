#pragma once

#include <array>
#include <vector>

#include "pathgan/scanpath.hpp"

namespace pathgan {

// One generator prediction: squashed position, nonnegative time increment,
// end-of-sequence probability.
struct StepOutput {
  double x = 0.0;
  double y = 0.0;
  double dt = 0.0;
  double eos = 0.0;
};

// Ground truth expanded to the model's four output dimensions: (x, y,
// duration, eos) with eos 0 everywhere and 1 on the last step.
std::vector<std::array<double, 4>> scanpath_targets(const Scanpath& gt);

// Mean over steps of the squared Euclidean distance across all four
// dimensions.
double content_loss(const std::vector<StepOutput>& pred,
                    const std::vector<std::array<double, 4>>& targets);
double content_loss(const std::vector<StepOutput>& pred, const Scanpath& gt);

// d(content)/d(pred), scaled, accumulated into d_pred.
void content_loss_backward(const std::vector<StepOutput>& pred,
                           const std::vector<std::array<double, 4>>& targets, double scale,
                           std::vector<std::array<double, 4>>& d_pred);

inline constexpr double kProbClip = 1e-7;  // probabilities are clipped before logs

struct AdvLosses {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

// d_loss = -[log d_real + log(1 - d_fake)].
// g_loss defaults to the non-saturating form -log d_fake; the saturating
// log(1 - d_fake) form is available behind the flag.
AdvLosses adversarial_losses(double d_real, double d_fake, bool saturating = false);

// Loss derivatives w.r.t. the probabilities (zero where clipped).
double d_loss_wrt_real(double d_real);
double d_loss_wrt_fake(double d_fake);
double g_loss_wrt_fake(double d_fake, bool saturating = false);

double combined_generator_loss(double g_adv, double content, double alpha);

}  // namespace pathgan
