#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pathgan/image.hpp"
#include "pathgan/nn/layers.hpp"
#include "pathgan/nn/losses.hpp"
#include "pathgan/nn/param_store.hpp"
#include "pathgan/rng.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

struct ModelConfig {
  std::vector<int> conv_channels{16, 32, 64, 64};  // stride-2 3x3 convs
  int hidden = 128;
  int layers = 2;
  double dropout = 0.1;
  int max_len = 64;
  double eos_threshold = 0.5;
  double alpha = 0.05;  // content-loss weight in the combined objective
  bool freeze_encoder = false;
  bool saturating_gan_loss = false;
  double bn_eps = 1e-5;
  double bn_momentum = 0.02;  // slow normalizer drift; warmup covers initialization
  // Instance noise added to real and fake sequences before discriminator
  // scoring during training. Real end-of-sequence flags are exactly 0 or 1
  // while generated ones never are; without overlap the discriminator
  // saturates in a handful of updates and the generator signal dies.
  double d_input_noise = 0.05;

  int feature_dim() const { return conv_channels.back(); }
};

// L x (LSTM -> batch norm -> dropout), the recurrent module shared in shape
// by generator and discriminator.
struct RecurrentStack {
  std::vector<LstmLayer> lstm;
  std::vector<BatchNormSeq> bn;
  Dropout drop;

  void configure(const std::string& prefix, int in_dim, int hidden, int layers, double dropout,
                 double bn_eps);
  void register_params(ParamStore& store, Rng& rng) const;

  struct Cache {
    std::vector<LstmLayer::Cache> lstm;
    std::vector<BatchNormSeq::Cache> bn;
    std::vector<Dropout::Cache> drop;
  };

  Seq forward(const Seq& in, const ParamStore& params, PassMode mode, Rng& rng,
              Cache* cache) const;
  Seq backward(const Seq& d_out, const ParamStore& params, ParamStore* grads,
               const Cache& cache) const;
  void absorb_bn(ParamStore& params, const Cache& cache, double momentum) const;

  struct StepState {
    std::vector<std::vector<double>> h, c;
  };
  StepState make_state() const;
  void step(const double* x, std::vector<double>& out, StepState& state, const ParamStore& params,
            PassMode mode, Rng& rng) const;
};

// Conditional adversarial scanpath model: convolutional encoders feeding a
// recurrent generator with an end-of-sequence neuron and a two-branch
// recurrent discriminator. Generator and discriminator own separate encoders.
class PathganModel {
 public:
  PathganModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  std::vector<double> encode_image(const Image& img, bool discriminator_branch = false) const;

  struct GenCache {
    Encoder::Cache enc;
    std::vector<double> feature;
    Seq in;        // [feature, previous step] per step
    RecurrentStack::Cache stack;
    Seq stack_out;
    Seq head_pre;  // pre-squash head outputs
    std::vector<StepOutput> preds;
  };

  // Step k consumes the ground-truth step k-1 (zeros at k=0); returns len(gt)
  // predictions for loss computation.
  std::vector<StepOutput> generator_teacher_forced(const Image& img, const Scanpath& gt,
                                                   PassMode mode, Rng& rng,
                                                   GenCache* cache) const;

  // d_preds is w.r.t. the squashed outputs. Accumulates into grads; encoder
  // gradients follow the freeze flag.
  void generator_backward(const std::vector<std::array<double, 4>>& d_preds, ParamStore& grads,
                          const GenCache& cache) const;

  struct Rollout {
    Scanpath path;
    std::vector<double> eos;
  };

  // Free-running generation: dropout stays active (the model's noise source)
  // while batch norm runs on frozen statistics. Stops at the first step whose
  // EOS output exceeds the threshold, or at max_len.
  Rollout generator_rollout(const Image& img, const std::string& image_id, Rng& rng) const;

  struct DiscCache {
    Encoder::Cache enc;
    std::vector<double> feature;
    Seq in;
    RecurrentStack::Cache stack;
    Seq stack_out;
    double logit = 0.0;
    double prob = 0.5;
  };

  // Probability in (0,1) that the sequence is real, conditioned on the image.
  double discriminator_score(const Image& img, const std::vector<StepOutput>& seq, PassMode mode,
                             Rng& rng, DiscCache* cache) const;

  // Backprop from dL/d(prob). Discriminator weight gradients accumulate into
  // grads when non-null; per-step input gradients (the path into the
  // generator) are returned when want_dseq.
  std::vector<std::array<double, 4>> discriminator_backward(double d_prob, ParamStore* grads,
                                                            const DiscCache& cache,
                                                            bool want_dseq) const;

  // Fold the batch statistics of a Train-mode pass into the running ones.
  void absorb_generator_bn(const GenCache& cache);
  void absorb_discriminator_bn(const DiscCache& cache);

 private:
  ModelConfig cfg_;
  ParamStore params_;
  Encoder g_enc_, d_enc_;
  RecurrentStack g_stack_, d_stack_;
  Linear g_head_, d_head_;
};

}  // namespace pathgan
