#include "pathgan/nn/model.hpp"

#include <cmath>

#include "pathgan/error.hpp"

namespace pathgan {

// ---------------------------------------------------------------------------
// RecurrentStack

void RecurrentStack::configure(const std::string& prefix, int in_dim, int hidden, int layers,
                               double dropout, double bn_eps) {
  lstm.clear();
  bn.clear();
  drop.p = dropout;
  int cur = in_dim;
  for (int l = 0; l < layers; ++l) {
    LstmLayer cell;
    cell.in_dim = cur;
    cell.hidden = hidden;
    cell.w_name = prefix + "lstm" + std::to_string(l) + ".w";
    cell.b_name = prefix + "lstm" + std::to_string(l) + ".b";
    lstm.push_back(cell);

    BatchNormSeq norm;
    norm.dim = hidden;
    norm.eps = bn_eps;
    norm.gamma_name = prefix + "bn" + std::to_string(l) + ".gamma";
    norm.beta_name = prefix + "bn" + std::to_string(l) + ".beta";
    norm.rmean_name = prefix + "bn" + std::to_string(l) + ".rmean";
    norm.rvar_name = prefix + "bn" + std::to_string(l) + ".rvar";
    bn.push_back(norm);
    cur = hidden;
  }
}

void RecurrentStack::register_params(ParamStore& store, Rng& rng) const {
  for (size_t l = 0; l < lstm.size(); ++l) {
    lstm[l].register_params(store, rng);
    bn[l].register_params(store);
  }
}

Seq RecurrentStack::forward(const Seq& in, const ParamStore& params, PassMode mode, Rng& rng,
                            Cache* cache) const {
  if (cache) {
    cache->lstm.resize(lstm.size());
    cache->bn.resize(bn.size());
    cache->drop.resize(lstm.size());
  }
  Seq cur = in;
  for (size_t l = 0; l < lstm.size(); ++l) {
    cur = lstm[l].forward(cur, params, cache ? &cache->lstm[l] : nullptr);
    cur = bn[l].forward(cur, params, mode, cache ? &cache->bn[l] : nullptr);
    cur = drop.forward(cur, mode, rng, cache ? &cache->drop[l] : nullptr);
  }
  return cur;
}

Seq RecurrentStack::backward(const Seq& d_out, const ParamStore& params, ParamStore* grads,
                             const Cache& cache) const {
  Seq d = d_out;
  for (size_t l = lstm.size(); l-- > 0;) {
    d = drop.backward(d, cache.drop[l]);
    d = bn[l].backward(d, params, grads, cache.bn[l]);
    d = lstm[l].backward(d, params, grads, cache.lstm[l]);
  }
  return d;
}

void RecurrentStack::absorb_bn(ParamStore& params, const Cache& cache, double momentum) const {
  for (size_t l = 0; l < bn.size(); ++l) bn[l].absorb(params, cache.bn[l], momentum);
}

RecurrentStack::StepState RecurrentStack::make_state() const {
  StepState s;
  s.h.resize(lstm.size());
  s.c.resize(lstm.size());
  for (size_t l = 0; l < lstm.size(); ++l) {
    s.h[l].assign(static_cast<size_t>(lstm[l].hidden), 0.0);
    s.c[l].assign(static_cast<size_t>(lstm[l].hidden), 0.0);
  }
  return s;
}

void RecurrentStack::step(const double* x, std::vector<double>& out, StepState& state,
                          const ParamStore& params, PassMode mode, Rng& rng) const {
  std::vector<double> cur(x, x + lstm.front().in_dim);
  std::vector<double> buf;
  for (size_t l = 0; l < lstm.size(); ++l) {
    lstm[l].step(cur.data(), state.h[l], state.c[l], params);
    buf.assign(static_cast<size_t>(lstm[l].hidden), 0.0);
    bn[l].step(state.h[l].data(), buf.data(), params);
    cur.resize(buf.size());
    drop.step(buf.data(), cur.data(), lstm[l].hidden, mode, rng);
  }
  out = cur;
}

// ---------------------------------------------------------------------------
// PathganModel

PathganModel::PathganModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  const int f = cfg_.feature_dim();
  g_enc_.configure("gen.enc.", cfg_.conv_channels);
  g_stack_.configure("gen.", f + 4, cfg_.hidden, cfg_.layers, cfg_.dropout, cfg_.bn_eps);
  g_head_ = Linear{cfg_.hidden, 4, "gen.head.w", "gen.head.b", 0.1};
  d_enc_.configure("disc.enc.", cfg_.conv_channels);
  d_stack_.configure("disc.", f + 4, cfg_.hidden, cfg_.layers, cfg_.dropout, cfg_.bn_eps);
  d_head_ = Linear{cfg_.hidden, 1, "disc.head.w", "disc.head.b", 0.1};

  Rng rng(derive_seed(seed, "model_init"));
  g_enc_.register_params(params_, rng);
  g_stack_.register_params(params_, rng);
  g_head_.register_params(params_, rng);
  d_enc_.register_params(params_, rng);
  d_stack_.register_params(params_, rng);
  d_head_.register_params(params_, rng);
}

std::vector<double> PathganModel::encode_image(const Image& img, bool discriminator_branch) const {
  const Encoder& enc = discriminator_branch ? d_enc_ : g_enc_;
  return enc.forward(img, params_, nullptr);
}

namespace {

StepOutput squash_head(const double* z) {
  StepOutput s;
  s.x = stable_sigmoid(z[0]);
  s.y = stable_sigmoid(z[1]);
  s.dt = stable_softplus(z[2]);
  s.eos = stable_sigmoid(z[3]);
  return s;
}

// d(squashed)/d(pre) given pre-activation z and squashed value s.
void squash_backward(const double* z, const StepOutput& s, const double* d_sq, double* d_z) {
  d_z[0] = d_sq[0] * s.x * (1.0 - s.x);
  d_z[1] = d_sq[1] * s.y * (1.0 - s.y);
  d_z[2] = d_sq[2] * stable_sigmoid(z[2]);  // softplus'
  d_z[3] = d_sq[3] * s.eos * (1.0 - s.eos);
}

}  // namespace

std::vector<StepOutput> PathganModel::generator_teacher_forced(const Image& img,
                                                               const Scanpath& gt, PassMode mode,
                                                               Rng& rng, GenCache* cache) const {
  validate_scanpath(gt);
  const int f = cfg_.feature_dim();
  const int t_steps = static_cast<int>(gt.size());
  const std::vector<std::array<double, 4>> targets = scanpath_targets(gt);

  std::vector<double> feature = g_enc_.forward(img, params_, cache ? &cache->enc : nullptr);

  Seq in(t_steps, f + 4);
  for (int t = 0; t < t_steps; ++t) {
    double* row = in.step(t);
    for (int i = 0; i < f; ++i) row[i] = feature[i];
    if (t > 0) {
      for (int i = 0; i < 4; ++i) row[f + i] = targets[t - 1][i];
    }
  }

  RecurrentStack::Cache stack_cache;
  Seq stack_out = g_stack_.forward(in, params_, mode, rng, cache ? &cache->stack : &stack_cache);
  Seq head_pre = g_head_.forward(stack_out, params_);

  std::vector<StepOutput> preds(static_cast<size_t>(t_steps));
  for (int t = 0; t < t_steps; ++t) preds[t] = squash_head(head_pre.step(t));

  if (cache) {
    cache->feature = std::move(feature);
    cache->in = std::move(in);
    cache->stack_out = std::move(stack_out);
    cache->head_pre = std::move(head_pre);
    cache->preds = preds;
  }
  return preds;
}

void PathganModel::generator_backward(const std::vector<std::array<double, 4>>& d_preds,
                                      ParamStore& grads, const GenCache& cache) const {
  const int t_steps = static_cast<int>(d_preds.size());
  const int f = cfg_.feature_dim();

  Seq d_head_pre(t_steps, 4);
  for (int t = 0; t < t_steps; ++t) {
    squash_backward(cache.head_pre.step(t), cache.preds[t], d_preds[t].data(), d_head_pre.step(t));
  }
  Seq d_stack_out = g_head_.backward(d_head_pre, cache.stack_out, params_, &grads);
  Seq d_in = g_stack_.backward(d_stack_out, params_, &grads, cache.stack);

  if (!cfg_.freeze_encoder) {
    std::vector<double> d_feature(static_cast<size_t>(f), 0.0);
    for (int t = 0; t < t_steps; ++t) {
      const double* row = d_in.step(t);
      for (int i = 0; i < f; ++i) d_feature[i] += row[i];
    }
    g_enc_.backward(d_feature, params_, grads, cache.enc);
  }
  // gradients on the teacher-forced previous-step inputs land on ground
  // truth, not on parameters
}

PathganModel::Rollout PathganModel::generator_rollout(const Image& img,
                                                      const std::string& image_id,
                                                      Rng& rng) const {
  const int f = cfg_.feature_dim();
  const std::vector<double> feature = g_enc_.forward(img, params_, nullptr);

  Rollout out;
  out.path.image_id = image_id;
  RecurrentStack::StepState state = g_stack_.make_state();
  std::vector<double> x(static_cast<size_t>(f) + 4, 0.0);
  for (int i = 0; i < f; ++i) x[i] = feature[i];

  std::vector<double> hidden;
  double head_pre[4];
  double t_acc = 0.0;
  for (int k = 0; k < cfg_.max_len; ++k) {
    g_stack_.step(x.data(), hidden, state, params_, PassMode::Sample, rng);
    g_head_.step(hidden.data(), head_pre, params_);
    const StepOutput s = squash_head(head_pre);
    t_acc += s.dt;
    out.path.fixations.push_back({s.x, s.y, t_acc});
    out.eos.push_back(s.eos);
    if (s.eos > cfg_.eos_threshold) break;
    x[f + 0] = s.x;
    x[f + 1] = s.y;
    x[f + 2] = s.dt;
    x[f + 3] = s.eos;
  }
  return out;
}

double PathganModel::discriminator_score(const Image& img, const std::vector<StepOutput>& seq,
                                         PassMode mode, Rng& rng, DiscCache* cache) const {
  if (seq.empty()) fail(Err::EmptySequence, "discriminator needs >= 1 step");
  const int f = cfg_.feature_dim();
  const int t_steps = static_cast<int>(seq.size());

  std::vector<double> feature = d_enc_.forward(img, params_, cache ? &cache->enc : nullptr);

  Seq in(t_steps, f + 4);
  for (int t = 0; t < t_steps; ++t) {
    double* row = in.step(t);
    for (int i = 0; i < f; ++i) row[i] = feature[i];
    row[f + 0] = seq[t].x;
    row[f + 1] = seq[t].y;
    row[f + 2] = seq[t].dt;
    row[f + 3] = seq[t].eos;
  }

  RecurrentStack::Cache local;
  Seq stack_out = d_stack_.forward(in, params_, mode, rng, cache ? &cache->stack : &local);
  double logit = 0.0;
  d_head_.step(stack_out.step(t_steps - 1), &logit, params_);
  const double prob = stable_sigmoid(logit);

  if (cache) {
    cache->feature = std::move(feature);
    cache->in = std::move(in);
    cache->stack_out = std::move(stack_out);
    cache->logit = logit;
    cache->prob = prob;
  }
  return prob;
}

std::vector<std::array<double, 4>> PathganModel::discriminator_backward(double d_prob,
                                                                        ParamStore* grads,
                                                                        const DiscCache& cache,
                                                                        bool want_dseq) const {
  const int t_steps = cache.stack_out.steps;
  const int f = cfg_.feature_dim();
  const double d_logit = d_prob * cache.prob * (1.0 - cache.prob);

  Seq d_stack_out(t_steps, cfg_.hidden);
  const Array& w = params_.at(d_head_.w_name);
  double* last = d_stack_out.step(t_steps - 1);
  for (int i = 0; i < cfg_.hidden; ++i) last[i] = d_logit * w.data[i];
  if (grads) {
    Array& dw = grads->at(d_head_.w_name);
    Array& db = grads->at(d_head_.b_name);
    const double* h_last = cache.stack_out.step(t_steps - 1);
    for (int i = 0; i < cfg_.hidden; ++i) dw.data[i] += d_logit * h_last[i];
    db.data[0] += d_logit;
  }

  Seq d_in = d_stack_.backward(d_stack_out, params_, grads, cache.stack);

  if (grads && !cfg_.freeze_encoder) {
    std::vector<double> d_feature(static_cast<size_t>(f), 0.0);
    for (int t = 0; t < t_steps; ++t) {
      const double* row = d_in.step(t);
      for (int i = 0; i < f; ++i) d_feature[i] += row[i];
    }
    d_enc_.backward(d_feature, params_, *grads, cache.enc);
  }

  std::vector<std::array<double, 4>> d_seq;
  if (want_dseq) {
    d_seq.resize(static_cast<size_t>(t_steps));
    for (int t = 0; t < t_steps; ++t) {
      const double* row = d_in.step(t);
      for (int i = 0; i < 4; ++i) d_seq[t][i] = row[f + i];
    }
  }
  return d_seq;
}

void PathganModel::absorb_generator_bn(const GenCache& cache) {
  g_stack_.absorb_bn(params_, cache.stack, cfg_.bn_momentum);
}

void PathganModel::absorb_discriminator_bn(const DiscCache& cache) {
  d_stack_.absorb_bn(params_, cache.stack, cfg_.bn_momentum);
}

}  // namespace pathgan
