#include "pathgan/nn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pathgan/error.hpp"

namespace pathgan {

std::vector<std::array<double, 4>> scanpath_targets(const Scanpath& gt) {
  const std::vector<double> dur = durations(gt);
  std::vector<std::array<double, 4>> targets(gt.size());
  for (size_t i = 0; i < gt.size(); ++i) {
    targets[i] = {gt.fixations[i].x, gt.fixations[i].y, dur[i],
                  i + 1 == gt.size() ? 1.0 : 0.0};
  }
  return targets;
}

double content_loss(const std::vector<StepOutput>& pred,
                    const std::vector<std::array<double, 4>>& targets) {
  if (pred.size() != targets.size()) {
    fail(Err::LengthMismatch, std::to_string(pred.size()) + " predictions vs " +
                                  std::to_string(targets.size()) + " targets");
  }
  double loss = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i].x - targets[i][0];
    const double dy = pred[i].y - targets[i][1];
    const double dt = pred[i].dt - targets[i][2];
    const double de = pred[i].eos - targets[i][3];
    loss += dx * dx + dy * dy + dt * dt + de * de;
  }
  return loss / static_cast<double>(pred.size());
}

double content_loss(const std::vector<StepOutput>& pred, const Scanpath& gt) {
  return content_loss(pred, scanpath_targets(gt));
}

void content_loss_backward(const std::vector<StepOutput>& pred,
                           const std::vector<std::array<double, 4>>& targets, double scale,
                           std::vector<std::array<double, 4>>& d_pred) {
  const double k = 2.0 * scale / static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    d_pred[i][0] += k * (pred[i].x - targets[i][0]);
    d_pred[i][1] += k * (pred[i].y - targets[i][1]);
    d_pred[i][2] += k * (pred[i].dt - targets[i][2]);
    d_pred[i][3] += k * (pred[i].eos - targets[i][3]);
  }
}

namespace {
double clip(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }
}  // namespace

AdvLosses adversarial_losses(double d_real, double d_fake, bool saturating) {
  AdvLosses l;
  l.d_loss = -(std::log(clip(d_real)) + std::log(1.0 - clip(d_fake)));
  l.g_loss = saturating ? std::log(1.0 - clip(d_fake)) : -std::log(clip(d_fake));
  return l;
}

double d_loss_wrt_real(double d_real) {
  if (d_real < kProbClip || d_real > 1.0 - kProbClip) return 0.0;
  return -1.0 / d_real;
}

double d_loss_wrt_fake(double d_fake) {
  if (d_fake < kProbClip || d_fake > 1.0 - kProbClip) return 0.0;
  return 1.0 / (1.0 - d_fake);
}

double g_loss_wrt_fake(double d_fake, bool saturating) {
  if (d_fake < kProbClip || d_fake > 1.0 - kProbClip) return 0.0;
  return saturating ? -1.0 / (1.0 - d_fake) : -1.0 / d_fake;
}

double combined_generator_loss(double g_adv, double content, double alpha) {
  return g_adv + alpha * content;
}

}  // namespace pathgan
