#include "pathgan/nn/layers.hpp"

#include <cmath>

#include "pathgan/error.hpp"
#include "pathgan/kernels.hpp"

namespace pathgan {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

namespace {

void glorot_uniform(Array& a, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : a.data) v = rng.uniform(-bound, bound);
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv3x3s2

void Conv3x3s2::register_params(ParamStore& store, Rng& rng) const {
  Array& w = store.add(w_name, {static_cast<size_t>(out_ch), 3, 3 * static_cast<size_t>(in_ch)});
  glorot_uniform(w, 9 * static_cast<size_t>(in_ch), 9 * static_cast<size_t>(out_ch), rng);
  store.add(b_name, {static_cast<size_t>(out_ch)});
}

Image Conv3x3s2::forward(const Image& in, const ParamStore& params, Cache* cache) const {
  const Array& w = params.at(w_name);
  const Array& b = params.at(b_name);
  const int oh = (in.height - 1) / 2 + 1;
  const int ow = (in.width - 1) / 2 + 1;

  Image padded(in.width + 2, in.height + 2, in.channels);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      for (int c = 0; c < in.channels; ++c) padded.at(y + 1, x + 1, c) = in.at(y, x, c);
    }
  }

  Image out(ow, oh, out_ch);
  const int row_span = 3 * in_ch;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const int iy = oy * 2;
      const int ix = ox * 2;
      for (int oc = 0; oc < out_ch; ++oc) {
        double s = b.data[oc];
        const double* wrow = w.data.data() + static_cast<size_t>(oc) * 3 * row_span;
        for (int ky = 0; ky < 3; ++ky) {
          const double* prow = &padded.at(iy + ky, ix, 0);
          s += kernels::dot(prow, wrow + ky * row_span, row_span);
        }
        out.at(oy, ox, oc) = std::tanh(s);
      }
    }
  }
  if (cache) {
    cache->padded = std::move(padded);
    cache->out = out;
  }
  return out;
}

Image Conv3x3s2::backward(const Image& d_out, const ParamStore& params, ParamStore& grads,
                          const Cache& cache) const {
  const Array& w = params.at(w_name);
  Array& dw = grads.at(w_name);
  Array& db = grads.at(b_name);
  const Image& padded = cache.padded;
  const Image& out = cache.out;

  Image d_padded(padded.width, padded.height, padded.channels);
  const int row_span = 3 * in_ch;
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      const int iy = oy * 2;
      const int ix = ox * 2;
      for (int oc = 0; oc < out_ch; ++oc) {
        const double o = out.at(oy, ox, oc);
        const double dz = d_out.at(oy, ox, oc) * (1.0 - o * o);
        if (dz == 0.0) continue;
        const double* wrow = w.data.data() + static_cast<size_t>(oc) * 3 * row_span;
        double* dwrow = dw.data.data() + static_cast<size_t>(oc) * 3 * row_span;
        db.data[oc] += dz;
        for (int ky = 0; ky < 3; ++ky) {
          const double* prow = &padded.at(iy + ky, ix, 0);
          double* dprow = &d_padded.at(iy + ky, ix, 0);
          kernels::axpy(dz, prow, dwrow + ky * row_span, row_span);
          kernels::axpy(dz, wrow + ky * row_span, dprow, row_span);
        }
      }
    }
  }

  Image d_in(padded.width - 2, padded.height - 2, padded.channels);
  for (int y = 0; y < d_in.height; ++y) {
    for (int x = 0; x < d_in.width; ++x) {
      for (int c = 0; c < d_in.channels; ++c) d_in.at(y, x, c) = d_padded.at(y + 1, x + 1, c);
    }
  }
  return d_in;
}

// ---------------------------------------------------------------------------
// Encoder

void Encoder::configure(const std::string& pfx, const std::vector<int>& channels) {
  prefix = pfx;
  convs.clear();
  int in_ch = 3;
  for (size_t i = 0; i < channels.size(); ++i) {
    Conv3x3s2 c;
    c.in_ch = in_ch;
    c.out_ch = channels[i];
    c.w_name = prefix + "conv" + std::to_string(i) + ".w";
    c.b_name = prefix + "conv" + std::to_string(i) + ".b";
    convs.push_back(c);
    in_ch = channels[i];
  }
  feature_dim = in_ch;
}

void Encoder::register_params(ParamStore& store, Rng& rng) const {
  for (const Conv3x3s2& c : convs) c.register_params(store, rng);
}

std::vector<double> Encoder::forward(const Image& img, const ParamStore& params,
                                     Cache* cache) const {
  const int min_side = 1 << convs.size();
  if (img.width < min_side || img.height < min_side) {
    fail(Err::ImageTooSmall, std::to_string(img.width) + "x" + std::to_string(img.height) +
                                 " (need >= " + std::to_string(min_side) + " per side)");
  }
  if (cache) cache->conv.resize(convs.size());
  Image cur = img;
  for (size_t i = 0; i < convs.size(); ++i) {
    cur = convs[i].forward(cur, params, cache ? &cache->conv[i] : nullptr);
  }
  std::vector<double> feat(static_cast<size_t>(feature_dim), 0.0);
  const double inv = 1.0 / (static_cast<double>(cur.width) * cur.height);
  for (int y = 0; y < cur.height; ++y) {
    for (int x = 0; x < cur.width; ++x) {
      for (int c = 0; c < feature_dim; ++c) feat[c] += cur.at(y, x, c) * inv;
    }
  }
  return feat;
}

void Encoder::backward(const std::vector<double>& d_feat, const ParamStore& params,
                       ParamStore& grads, const Cache& cache) const {
  const Image& last = cache.conv.back().out;
  Image d(last.width, last.height, last.channels);
  const double inv = 1.0 / (static_cast<double>(last.width) * last.height);
  for (int y = 0; y < last.height; ++y) {
    for (int x = 0; x < last.width; ++x) {
      for (int c = 0; c < last.channels; ++c) d.at(y, x, c) = d_feat[c] * inv;
    }
  }
  for (size_t i = convs.size(); i-- > 0;) {
    d = convs[i].backward(d, params, grads, cache.conv[i]);
  }
}

// ---------------------------------------------------------------------------
// LstmLayer

void LstmLayer::register_params(ParamStore& store, Rng& rng) const {
  const size_t rows = 4 * static_cast<size_t>(hidden);
  const size_t cols = static_cast<size_t>(in_dim + hidden);
  Array& w = store.add(w_name, {rows, cols});
  glorot_uniform(w, cols, static_cast<size_t>(hidden), rng);
  Array& b = store.add(b_name, {rows});
  // forget-gate bias starts open
  for (int i = hidden; i < 2 * hidden; ++i) b.data[i] = 1.0;
}

Seq LstmLayer::forward(const Seq& in, const ParamStore& params, Cache* cache) const {
  const Array& w = params.at(w_name);
  const Array& b = params.at(b_name);
  const int t_steps = in.steps;
  const int xh_dim = in_dim + hidden;
  const int h4 = 4 * hidden;

  Seq h_out(t_steps, hidden);
  Seq xh(t_steps, xh_dim);
  Seq act(t_steps, h4);
  Seq cells(t_steps, hidden);
  Seq tanh_c(t_steps, hidden);

  std::vector<double> z(static_cast<size_t>(h4));
  for (int t = 0; t < t_steps; ++t) {
    double* xh_t = xh.step(t);
    for (int i = 0; i < in_dim; ++i) xh_t[i] = in.step(t)[i];
    if (t > 0) {
      const double* h_prev = h_out.step(t - 1);
      for (int i = 0; i < hidden; ++i) xh_t[in_dim + i] = h_prev[i];
    }
    kernels::matvec(w.data.data(), xh_t, b.data.data(), z.data(), h4, xh_dim);

    double* a = act.step(t);
    for (int i = 0; i < hidden; ++i) a[i] = stable_sigmoid(z[i]);                      // input
    for (int i = hidden; i < 2 * hidden; ++i) a[i] = stable_sigmoid(z[i]);             // forget
    for (int i = 2 * hidden; i < 3 * hidden; ++i) a[i] = std::tanh(z[i]);              // candidate
    for (int i = 3 * hidden; i < 4 * hidden; ++i) a[i] = stable_sigmoid(z[i]);         // output

    double* c_t = cells.step(t);
    const double* c_prev = t > 0 ? cells.step(t - 1) : nullptr;
    double* tc = tanh_c.step(t);
    double* h_t = h_out.step(t);
    for (int i = 0; i < hidden; ++i) {
      const double cp = c_prev ? c_prev[i] : 0.0;
      c_t[i] = a[hidden + i] * cp + a[i] * a[2 * hidden + i];
      tc[i] = std::tanh(c_t[i]);
      h_t[i] = a[3 * hidden + i] * tc[i];
    }
  }
  if (cache) {
    cache->xh = std::move(xh);
    cache->act = std::move(act);
    cache->c = std::move(cells);
    cache->tanh_c = std::move(tanh_c);
  }
  return h_out;
}

Seq LstmLayer::backward(const Seq& d_h, const ParamStore& params, ParamStore* grads,
                        const Cache& cache) const {
  const Array& w = params.at(w_name);
  Array* dw = grads ? &grads->at(w_name) : nullptr;
  Array* db = grads ? &grads->at(b_name) : nullptr;

  const int t_steps = d_h.steps;
  const int xh_dim = in_dim + hidden;
  const int h4 = 4 * hidden;

  Seq d_in(t_steps, in_dim);
  std::vector<double> dh(static_cast<size_t>(hidden), 0.0);
  std::vector<double> dc(static_cast<size_t>(hidden), 0.0);
  std::vector<double> dz(static_cast<size_t>(h4));
  std::vector<double> dxh(static_cast<size_t>(xh_dim));

  for (int t = t_steps - 1; t >= 0; --t) {
    const double* a = cache.act.step(t);
    const double* tc = cache.tanh_c.step(t);
    const double* c_prev = t > 0 ? cache.c.step(t - 1) : nullptr;

    for (int i = 0; i < hidden; ++i) dh[i] += d_h.step(t)[i];

    for (int i = 0; i < hidden; ++i) {
      const double i_g = a[i];
      const double f_g = a[hidden + i];
      const double g_g = a[2 * hidden + i];
      const double o_g = a[3 * hidden + i];
      const double cp = c_prev ? c_prev[i] : 0.0;

      const double d_o = dh[i] * tc[i];
      double d_c = dc[i] + dh[i] * o_g * (1.0 - tc[i] * tc[i]);
      const double d_i = d_c * g_g;
      const double d_f = d_c * cp;
      const double d_g = d_c * i_g;

      dz[i] = d_i * i_g * (1.0 - i_g);
      dz[hidden + i] = d_f * f_g * (1.0 - f_g);
      dz[2 * hidden + i] = d_g * (1.0 - g_g * g_g);
      dz[3 * hidden + i] = d_o * o_g * (1.0 - o_g);

      dc[i] = d_c * f_g;  // flows to c_{t-1}
    }

    if (grads) {
      kernels::outer_acc(dz.data(), cache.xh.step(t), dw->data.data(), h4, xh_dim);
      kernels::add(dz.data(), db->data.data(), h4);
    }

    std::fill(dxh.begin(), dxh.end(), 0.0);
    kernels::matvec_t_acc(w.data.data(), dz.data(), dxh.data(), h4, xh_dim);
    for (int i = 0; i < in_dim; ++i) d_in.step(t)[i] = dxh[i];
    for (int i = 0; i < hidden; ++i) dh[i] = dxh[in_dim + i];
  }
  return d_in;
}

void LstmLayer::step(const double* x, std::vector<double>& h, std::vector<double>& c,
                     const ParamStore& params) const {
  const Array& w = params.at(w_name);
  const Array& b = params.at(b_name);
  const int xh_dim = in_dim + hidden;
  const int h4 = 4 * hidden;

  std::vector<double> xh(static_cast<size_t>(xh_dim));
  for (int i = 0; i < in_dim; ++i) xh[i] = x[i];
  for (int i = 0; i < hidden; ++i) xh[in_dim + i] = h[i];
  std::vector<double> z(static_cast<size_t>(h4));
  kernels::matvec(w.data.data(), xh.data(), b.data.data(), z.data(), h4, xh_dim);
  for (int i = 0; i < hidden; ++i) {
    const double i_g = stable_sigmoid(z[i]);
    const double f_g = stable_sigmoid(z[hidden + i]);
    const double g_g = std::tanh(z[2 * hidden + i]);
    const double o_g = stable_sigmoid(z[3 * hidden + i]);
    c[i] = f_g * c[i] + i_g * g_g;
    h[i] = o_g * std::tanh(c[i]);
  }
}

// ---------------------------------------------------------------------------
// BatchNormSeq

void BatchNormSeq::register_params(ParamStore& store) const {
  Array& gamma = store.add(gamma_name, {static_cast<size_t>(dim)});
  std::fill(gamma.data.begin(), gamma.data.end(), 1.0);
  store.add(beta_name, {static_cast<size_t>(dim)});
  store.add(rmean_name, {static_cast<size_t>(dim)}, /*trainable=*/false);
  Array& rvar = store.add(rvar_name, {static_cast<size_t>(dim)}, /*trainable=*/false);
  std::fill(rvar.data.begin(), rvar.data.end(), 1.0);
}

// Normalization always runs on the running statistics, in training passes
// too; the statistics are constants in the gradient graph. Sequences here are
// a handful of steps (and the update schedule allows single-scanpath
// minibatches), so per-batch statistics would be too noisy to normalize with
// and would diverge from what evaluation sees. Training passes record the
// observed per-feature moments in the cache; absorb() folds them into the
// running estimates after the update.
Seq BatchNormSeq::forward(const Seq& in, const ParamStore& params, PassMode mode,
                          Cache* cache) const {
  const Array& gamma = params.at(gamma_name);
  const Array& beta = params.at(beta_name);
  const Array& rm = params.at(rmean_name);
  const Array& rv = params.at(rvar_name);
  Seq out(in.steps, dim);

  std::vector<double> inv_std(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) inv_std[i] = 1.0 / std::sqrt(rv.data[i] + eps);

  Seq xhat(in.steps, dim);
  for (int t = 0; t < in.steps; ++t) {
    const double* x = in.step(t);
    double* xh = xhat.step(t);
    double* y = out.step(t);
    for (int i = 0; i < dim; ++i) {
      xh[i] = (x[i] - rm.data[i]) * inv_std[i];
      y[i] = gamma.data[i] * xh[i] + beta.data[i];
    }
  }

  if (cache) {
    cache->train_mode = mode == PassMode::Train;
    cache->inv_std = std::move(inv_std);
    cache->xhat = std::move(xhat);
    if (mode == PassMode::Train) {
      // second moment measured around the running mean, so cross-sequence
      // variation is part of the estimate (within a short sequence the
      // activations barely move and their own variance would collapse)
      const double inv_t = 1.0 / static_cast<double>(in.steps);
      cache->mean.assign(static_cast<size_t>(dim), 0.0);
      cache->var.assign(static_cast<size_t>(dim), 0.0);
      for (int t = 0; t < in.steps; ++t) {
        const double* x = in.step(t);
        for (int i = 0; i < dim; ++i) {
          cache->mean[i] += x[i] * inv_t;
          const double d = x[i] - rm.data[i];
          cache->var[i] += d * d * inv_t;
        }
      }
    }
  }
  return out;
}

Seq BatchNormSeq::backward(const Seq& d_out, const ParamStore& params, ParamStore* grads,
                           const Cache& cache) const {
  const Array& gamma = params.at(gamma_name);
  const int t_steps = d_out.steps;

  Seq d_in(t_steps, dim);
  for (int t = 0; t < t_steps; ++t) {
    const double* d = d_out.step(t);
    double* o = d_in.step(t);
    for (int i = 0; i < dim; ++i) o[i] = d[i] * gamma.data[i] * cache.inv_std[i];
  }

  if (grads) {
    Array& dg = grads->at(gamma_name);
    Array& db = grads->at(beta_name);
    for (int t = 0; t < t_steps; ++t) {
      const double* d = d_out.step(t);
      const double* xh = cache.xhat.step(t);
      for (int i = 0; i < dim; ++i) {
        dg.data[i] += d[i] * xh[i];
        db.data[i] += d[i];
      }
    }
  }
  return d_in;
}

void BatchNormSeq::step(const double* x, double* y, const ParamStore& params) const {
  const Array& gamma = params.at(gamma_name);
  const Array& beta = params.at(beta_name);
  const Array& rm = params.at(rmean_name);
  const Array& rv = params.at(rvar_name);
  for (int i = 0; i < dim; ++i) {
    y[i] = gamma.data[i] * (x[i] - rm.data[i]) / std::sqrt(rv.data[i] + eps) + beta.data[i];
  }
}

void BatchNormSeq::absorb(ParamStore& params, const Cache& cache, double momentum) const {
  if (!cache.train_mode) return;
  Array& rm = params.at(rmean_name);
  Array& rv = params.at(rvar_name);
  for (int i = 0; i < dim; ++i) {
    rm.data[i] = (1.0 - momentum) * rm.data[i] + momentum * cache.mean[i];
    rv.data[i] = (1.0 - momentum) * rv.data[i] + momentum * cache.var[i];
  }
}

// ---------------------------------------------------------------------------
// Dropout

Seq Dropout::forward(const Seq& in, PassMode mode, Rng& rng, Cache* cache) const {
  if (mode == PassMode::Frozen || p <= 0.0) {
    if (cache) cache->active = false;
    return in;
  }
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  Seq mask(in.steps, in.dim);
  Seq out(in.steps, in.dim);
  for (size_t i = 0; i < in.data.size(); ++i) {
    mask.data[i] = rng.bernoulli(keep) ? scale : 0.0;
    out.data[i] = in.data[i] * mask.data[i];
  }
  if (cache) {
    cache->active = true;
    cache->mask = std::move(mask);
  }
  return out;
}

Seq Dropout::backward(const Seq& d_out, const Cache& cache) const {
  if (!cache.active) return d_out;
  Seq d_in = d_out;
  kernels::hadamard(cache.mask.data.data(), d_in.data.data(), d_in.data.size());
  return d_in;
}

void Dropout::step(const double* x, double* y, int dim_in, PassMode mode, Rng& rng) const {
  if (mode == PassMode::Frozen || p <= 0.0) {
    for (int i = 0; i < dim_in; ++i) y[i] = x[i];
    return;
  }
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  for (int i = 0; i < dim_in; ++i) y[i] = rng.bernoulli(keep) ? x[i] * scale : 0.0;
}

// ---------------------------------------------------------------------------
// Linear

void Linear::register_params(ParamStore& store, Rng& rng) const {
  Array& w = store.add(w_name, {static_cast<size_t>(out_dim), static_cast<size_t>(in_dim)});
  glorot_uniform(w, static_cast<size_t>(in_dim), static_cast<size_t>(out_dim), rng);
  if (init_scale != 1.0) {
    for (double& v : w.data) v *= init_scale;
  }
  store.add(b_name, {static_cast<size_t>(out_dim)});
}

Seq Linear::forward(const Seq& in, const ParamStore& params) const {
  const Array& w = params.at(w_name);
  const Array& b = params.at(b_name);
  Seq out(in.steps, out_dim);
  for (int t = 0; t < in.steps; ++t) {
    kernels::matvec(w.data.data(), in.step(t), b.data.data(), out.step(t), out_dim, in_dim);
  }
  return out;
}

Seq Linear::backward(const Seq& d_out, const Seq& in, const ParamStore& params,
                     ParamStore* grads) const {
  const Array& w = params.at(w_name);
  Seq d_in(in.steps, in_dim);
  for (int t = 0; t < in.steps; ++t) {
    if (grads) {
      kernels::outer_acc(d_out.step(t), in.step(t), grads->at(w_name).data.data(), out_dim,
                         in_dim);
      kernels::add(d_out.step(t), grads->at(b_name).data.data(), out_dim);
    }
    kernels::matvec_t_acc(w.data.data(), d_out.step(t), d_in.step(t), out_dim, in_dim);
  }
  return d_in;
}

void Linear::step(const double* x, double* y, const ParamStore& params) const {
  const Array& w = params.at(w_name);
  const Array& b = params.at(b_name);
  kernels::matvec(w.data.data(), x, b.data.data(), y, out_dim, in_dim);
}

}  // namespace pathgan
