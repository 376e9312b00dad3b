#pragma once

#include <string>
#include <vector>

#include "pathgan/image.hpp"
#include "pathgan/nn/param_store.hpp"
#include "pathgan/rng.hpp"

namespace pathgan {

// Pass semantics:
//   Train  - dropout active (gradient passes); batch-norm records the
//            observed statistics for later absorption.
//   Sample - dropout stays active: the dropout mask is the model's noise
//            source, so free-running generation keeps it on.
//   Frozen - dropout off; fully deterministic.
// Batch-norm always normalizes with its running statistics (see
// BatchNormSeq).
enum class PassMode { Train, Sample, Frozen };

// T steps of dim doubles, contiguous per step.
struct Seq {
  int steps = 0;
  int dim = 0;
  std::vector<double> data;

  Seq() = default;
  Seq(int t, int d) : steps(t), dim(d), data(static_cast<size_t>(t) * d, 0.0) {}
  double* step(int t) { return data.data() + static_cast<size_t>(t) * dim; }
  const double* step(int t) const { return data.data() + static_cast<size_t>(t) * dim; }
};

// 3x3 convolution, stride 2, zero padding 1, tanh activation. Weights are
// laid out [out_ch][ky][3*in_ch] so each kernel row multiplies one contiguous
// span of the padded input row.
struct Conv3x3s2 {
  int in_ch = 0;
  int out_ch = 0;
  std::string w_name, b_name;

  void register_params(ParamStore& store, Rng& rng) const;

  struct Cache {
    Image padded;  // input with 1-pixel zero border
    Image out;     // post-tanh output
  };

  Image forward(const Image& in, const ParamStore& params, Cache* cache) const;
  // d_out is w.r.t. the post-tanh output; returns d_in.
  Image backward(const Image& d_out, const ParamStore& params, ParamStore& grads,
                 const Cache& cache) const;
};

// Conv stack + global average pooling to a fixed-size feature vector, so any
// image size above the minimum maps to the same representation.
struct Encoder {
  std::string prefix;
  std::vector<Conv3x3s2> convs;
  int feature_dim = 0;

  void configure(const std::string& prefix, const std::vector<int>& channels);
  void register_params(ParamStore& store, Rng& rng) const;

  struct Cache {
    std::vector<Conv3x3s2::Cache> conv;
  };

  std::vector<double> forward(const Image& img, const ParamStore& params, Cache* cache) const;
  void backward(const std::vector<double>& d_feat, const ParamStore& params, ParamStore& grads,
                const Cache& cache) const;
};

// Single fully connected LSTM layer (gate order i, f, g, o; tanh cell).
struct LstmLayer {
  int in_dim = 0;
  int hidden = 0;
  std::string w_name, b_name;  // w: [4H x (in_dim+H)], b: [4H], forget bias 1

  void register_params(ParamStore& store, Rng& rng) const;

  struct Cache {
    Seq xh;      // concatenated [x_t, h_{t-1}]
    Seq act;     // post-activation gates
    Seq c;       // cell states
    Seq tanh_c;
  };

  Seq forward(const Seq& in, const ParamStore& params, Cache* cache) const;
  // Backpropagation through time. grads may be null to skip weight gradients
  // (used when only input gradients are needed).
  Seq backward(const Seq& d_h, const ParamStore& params, ParamStore* grads,
               const Cache& cache) const;
  // One free-running step; h and c are the caller-held state.
  void step(const double* x, std::vector<double>& h, std::vector<double>& c,
            const ParamStore& params) const;
};

// Per-feature normalization by running statistics, which are constants in
// the gradient graph. Sequences are short (and minibatches may be a single
// scanpath), so normalizing with per-batch moments would be degenerate and
// would diverge from evaluation behavior. Training passes record the
// observed moments; absorb() folds them into the running estimates so the
// normalizer tracks the activation distribution.
struct BatchNormSeq {
  int dim = 0;
  std::string gamma_name, beta_name, rmean_name, rvar_name;
  double eps = 1e-5;

  void register_params(ParamStore& store) const;

  struct Cache {
    bool train_mode = false;
    std::vector<double> mean, var, inv_std;
    Seq xhat;
  };

  Seq forward(const Seq& in, const ParamStore& params, PassMode mode, Cache* cache) const;
  Seq backward(const Seq& d_out, const ParamStore& params, ParamStore* grads,
               const Cache& cache) const;
  void step(const double* x, double* y, const ParamStore& params) const;
  void absorb(ParamStore& params, const Cache& cache, double momentum) const;
};

// Inverted dropout; masks scale by 1/keep so Frozen passes need no rescale.
struct Dropout {
  double p = 0.1;

  struct Cache {
    bool active = false;
    Seq mask;
  };

  Seq forward(const Seq& in, PassMode mode, Rng& rng, Cache* cache) const;
  Seq backward(const Seq& d_out, const Cache& cache) const;
  void step(const double* x, double* y, int dim, PassMode mode, Rng& rng) const;
};

struct Linear {
  int in_dim = 0;
  int out_dim = 0;
  std::string w_name, b_name;
  double init_scale = 1.0;  // output heads start small so fresh nets emit tame values

  void register_params(ParamStore& store, Rng& rng) const;
  Seq forward(const Seq& in, const ParamStore& params) const;
  Seq backward(const Seq& d_out, const Seq& in, const ParamStore& params, ParamStore* grads) const;
  void step(const double* x, double* y, const ParamStore& params) const;
};

// Numerically safe squashes shared by the output heads.
double stable_sigmoid(double x);
double stable_softplus(double x);

}  // namespace pathgan
