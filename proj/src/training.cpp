#include "pathgan/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "pathgan/assignment.hpp"
#include "pathgan/error.hpp"
#include "pathgan/io.hpp"
#include "pathgan/nn/checkpoint.hpp"
#include "pathgan/nn/losses.hpp"

namespace pathgan {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// TrainConfig

TrainConfig TrainConfig::from_map(const std::map<std::string, std::string>& kv) {
  TrainConfig c;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "dataset_dir") c.dataset_dir = value;
      else if (key == "out_dir") c.out_dir = value;
      else if (key == "geometry") {
        if (value == "planar") c.geometry = GeometryKind::Planar;
        else if (value == "spherical") c.geometry = GeometryKind::Spherical;
        else fail(Err::UsageError, "geometry must be planar or spherical, got '" + value + "'");
      } else if (key == "image_width") c.image_width = std::stoi(value);
      else if (key == "image_height") c.image_height = std::stoi(value);
      else if (key == "conv_channels") {
        c.model.conv_channels.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.model.conv_channels.push_back(std::stoi(tok));
        if (c.model.conv_channels.empty()) fail(Err::UsageError, "conv_channels is empty");
      } else if (key == "hidden") c.model.hidden = std::stoi(value);
      else if (key == "layers") c.model.layers = std::stoi(value);
      else if (key == "dropout") c.model.dropout = std::stod(value);
      else if (key == "max_len") c.model.max_len = std::stoi(value);
      else if (key == "eos_threshold") c.model.eos_threshold = std::stod(value);
      else if (key == "alpha") c.model.alpha = std::stod(value);
      else if (key == "freeze_encoder") c.model.freeze_encoder = std::stoi(value) != 0;
      else if (key == "saturating_gan_loss") c.model.saturating_gan_loss = std::stoi(value) != 0;
      else if (key == "bn_eps") c.model.bn_eps = std::stod(value);
      else if (key == "bn_momentum") c.model.bn_momentum = std::stod(value);
      else if (key == "lr") c.opt.lr = std::stod(value);
      else if (key == "rho") c.opt.rho = std::stod(value);
      else if (key == "eps") c.opt.eps = std::stod(value);
      else if (key == "d_input_noise") c.model.d_input_noise = std::stod(value);
      else if (key == "adv_grad_cap") c.adv_grad_cap = std::stod(value);
      else if (key == "bootstrap_epochs") c.bootstrap_epochs = std::stoi(value);
      else if (key == "iterations") c.iterations = std::stoi(value);
      else if (key == "d_updates") c.d_updates = std::stoi(value);
      else if (key == "g_updates") c.g_updates = std::stoi(value);
      else if (key == "minibatch") c.minibatch = std::stoi(value);
      else if (key == "split") c.split = std::stod(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "val_every") c.val_every = std::stoi(value);
      else if (key == "val_k") c.val_k = std::stoi(value);
      else if (key == "ckpt_every") c.ckpt_every = std::stoi(value);
      else fail(Err::UsageError, "unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      fail(Err::UsageError, "bad value for config key '" + key + "': '" + value + "'");
    } catch (const std::out_of_range&) {
      fail(Err::UsageError, "value out of range for config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  return from_map(read_config_file(path));
}

void TrainConfig::validate() const {
  if (minibatch < 1 || d_updates < 1 || g_updates < 1 || val_every < 1 || ckpt_every < 1) {
    fail(Err::UsageError, "minibatch, d_updates, g_updates, val_every, ckpt_every must be >= 1");
  }
  if (bootstrap_epochs < 0 || iterations < 0 || val_k < 0) {
    fail(Err::UsageError, "bootstrap_epochs, iterations, val_k must be >= 0");
  }
  if (!(split > 0.0 && split < 1.0)) fail(Err::UsageError, "split must be in (0,1)");
  if (image_width < 2 || image_height < 2) fail(Err::UsageError, "image dims too small");
  if (model.layers < 1 || model.hidden < 1 || model.conv_channels.empty()) {
    fail(Err::UsageError, "model needs >= 1 recurrent layer, hidden unit and conv channel");
  }
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) fail(Err::UsageError, "dropout must be in [0,1)");
  if (!(model.eos_threshold > 0.0 && model.eos_threshold < 1.0)) {
    fail(Err::UsageError, "eos_threshold must be in (0,1)");
  }
  if (model.alpha < 0.0) fail(Err::UsageError, "alpha must be >= 0");
  if (model.max_len < 1) fail(Err::UsageError, "max_len must be >= 1");
}

std::string TrainLog::to_csv() const {
  std::string out = "iteration,phase,content_loss,d_loss,g_loss,d_acc_real,d_acc_fake,val_jarodzka\n";
  char buf[40];
  auto cell = [&](double v) {
    if (std::isnan(v)) return std::string();
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const TrainLogRow& r : rows) {
    out += std::to_string(r.iteration) + "," + r.phase + "," + cell(r.content_loss) + "," +
           cell(r.d_loss) + "," + cell(r.g_loss) + "," + cell(r.d_acc_real) + "," +
           cell(r.d_acc_fake) + "," + cell(r.val_jarodzka) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset loading and preprocessing

RawDataset load_raw_dataset(const std::string& dir) {
  RawDataset raw;
  const fs::path images_dir = fs::path(dir) / "images";
  if (!fs::is_directory(images_dir)) {
    fail(Err::ParseError, "no images/ directory under '" + dir + "'");
  }
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(images_dir)) {
    if (e.path().extension() == ".pgm") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(Err::ParseError, "no .pgm images under '" + images_dir.string() + "'");
  for (const std::string& f : files) {
    int maxval = 0;
    SaliencyMap m;
    try {
      m = read_pgm(f, &maxval);
    } catch (const Error& e) {
      fail(Err::UndecodableImage, f + ": " + e.what());
    }
    raw.image_ids.push_back(fs::path(f).stem().string());
    raw.images.push_back(to_image(m, maxval, 3));
  }
  raw.scanpaths = load_scanpaths_planar((fs::path(dir) / "scanpaths.jsonl").string());

  const fs::path sal_dir = fs::path(dir) / "saliency";
  if (fs::is_directory(sal_dir)) {
    for (const auto& e : fs::directory_iterator(sal_dir)) {
      if (e.path().extension() == ".pgm") {
        raw.saliency[e.path().stem().string()] = read_pgm(e.path().string());
      }
    }
  }
  return raw;
}

PreparedDataset preprocess(const RawDataset& raw, const TrainConfig& cfg) {
  PreparedDataset out;
  out.image_ids = raw.image_ids;
  const int n = static_cast<int>(raw.images.size());
  if (n < 2) fail(Err::ValidationError, "need >= 2 images to split");

  std::map<std::string, int> id_index;
  for (int i = 0; i < n; ++i) id_index[raw.image_ids[i]] = i;

  // split by image so no image straddles train and validation
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(cfg.seed, "split"));
  for (int i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(static_cast<std::uint64_t>(i))]);
  int n_train = static_cast<int>(std::lround(cfg.split * n));
  n_train = std::clamp(n_train, 1, n - 1);
  std::vector<char> is_train(n, 0);
  for (int i = 0; i < n_train; ++i) is_train[order[i]] = 1;
  for (int i = 0; i < n; ++i) (is_train[i] ? out.train_images : out.val_images).push_back(i);

  // resize, then mean pixel over the training split only
  out.images.reserve(n);
  for (const Image& img : raw.images) {
    out.images.push_back(bilinear_resize(img, cfg.image_width, cfg.image_height));
  }
  out.mean_pixel = {0, 0, 0};
  for (int idx : out.train_images) {
    const std::array<double, 3> m = channel_means(out.images[idx]);
    for (int c = 0; c < 3; ++c) out.mean_pixel[c] += m[c];
  }
  for (int c = 0; c < 3; ++c) out.mean_pixel[c] /= static_cast<double>(out.train_images.size());
  for (Image& img : out.images) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        for (int c = 0; c < img.channels; ++c) img.at(y, x, c) -= out.mean_pixel[c];
      }
    }
  }

  for (const Scanpath& sp : raw.scanpaths) {
    auto it = id_index.find(sp.image_id);
    if (it == id_index.end()) {
      fail(Err::ValidationError, "scanpath references unknown image '" + sp.image_id + "'");
    }
    const int idx = it->second;
    Scanpath norm = sp;
    if (raw.pixel_coords) {
      const double w = static_cast<double>(raw.images[idx].width);
      const double h = static_cast<double>(raw.images[idx].height);
      for (size_t i = 0; i < norm.fixations.size(); ++i) {
        Fixation& f = norm.fixations[i];
        if (f.x < 0.0 || f.x > w || f.y < 0.0 || f.y > h) {
          fail(Err::FixationOutsideImage, sp.image_id + ": fixation " + std::to_string(i) +
                                              " at pixel (" + std::to_string(f.x) + "," +
                                              std::to_string(f.y) + ")");
        }
        f.x /= w;
        f.y /= h;
      }
    }
    validate_scanpath(norm);
    (is_train[idx] ? out.train : out.val).emplace_back(idx, std::move(norm));
  }
  if (out.train.empty() || out.val.empty()) {
    fail(Err::ValidationError, "both splits need at least one scanpath");
  }
  return out;
}

// ---------------------------------------------------------------------------
// TrainSession

TrainSession::TrainSession(const TrainConfig& cfg)
    : cfg_(cfg),
      data_(preprocess(load_raw_dataset(cfg.dataset_dir), cfg)),
      model_(cfg.model, cfg.seed),
      opt_g_(cfg.opt, model_.params(), "gen."),
      opt_d_(cfg.opt, model_.params(), "disc.") {
  warmup_norm_stats();
}

// Batch-norm running statistics start at (0,1), far from the activation
// distribution of a fresh network. Absorbing a few forward passes before the
// first gradient step keeps the normalizer gain from shifting mid-epoch.
void TrainSession::warmup_norm_stats() {
  const size_t n = std::min<size_t>(64, data_.train.size());
  for (int round = 0; round < 4; ++round) {
    for (size_t k = 0; k < n; ++k) {
      const auto& [img_idx, gt] = data_.train[k];
      Rng rng(derive_seed(cfg_.seed, "bn_warmup", static_cast<std::uint64_t>(round),
                          static_cast<std::uint64_t>(k)));
      PathganModel::GenCache gc;
      model_.generator_teacher_forced(data_.images[img_idx], gt, PassMode::Train, rng, &gc);
      model_.absorb_generator_bn(gc);

      const std::vector<std::array<double, 4>> targets = scanpath_targets(gt);
      std::vector<StepOutput> real(targets.size());
      for (size_t i = 0; i < targets.size(); ++i) {
        real[i] = {targets[i][0], targets[i][1], targets[i][2], targets[i][3]};
      }
      Rng drng(derive_seed(cfg_.seed, "bn_warmup_d", static_cast<std::uint64_t>(round),
                           static_cast<std::uint64_t>(k)));
      PathganModel::DiscCache dc;
      model_.discriminator_score(data_.images[img_idx], real, PassMode::Train, drng, &dc);
      model_.absorb_discriminator_bn(dc);
    }
  }
}

namespace {

ModelConfig model_config_from_checkpoint(const ParamStore& ckpt) {
  ModelConfig mc;
  const Array& ch = ckpt.at("meta.conv_channels");
  mc.conv_channels.clear();
  for (double v : ch.data) mc.conv_channels.push_back(static_cast<int>(v));
  const Array& ms = ckpt.at("meta.model");
  mc.hidden = static_cast<int>(ms.data[0]);
  mc.layers = static_cast<int>(ms.data[1]);
  mc.dropout = ms.data[2];
  mc.max_len = static_cast<int>(ms.data[3]);
  mc.eos_threshold = ms.data[4];
  mc.alpha = ms.data[5];
  mc.freeze_encoder = ms.data[6] != 0.0;
  mc.saturating_gan_loss = ms.data[7] != 0.0;
  mc.bn_eps = ms.data[8];
  mc.bn_momentum = ms.data[9];
  mc.d_input_noise = ms.data[10];
  return mc;
}

}  // namespace

TrainSession::TrainSession(const TrainConfig& cfg, const ParamStore& checkpoint)
    : cfg_(cfg),
      data_(preprocess(load_raw_dataset(cfg.dataset_dir), cfg)),
      model_(model_config_from_checkpoint(checkpoint),
             static_cast<std::uint64_t>(checkpoint.at("meta.train").data[0])),
      opt_g_(cfg.opt, model_.params(), "gen."),
      opt_d_(cfg.opt, model_.params(), "disc.") {
  cfg_.model = model_.config();
  cfg_.seed = static_cast<std::uint64_t>(checkpoint.at("meta.train").data[0]);
  for (const std::string& name : model_.params().names()) {
    model_.params().at(name).data = checkpoint.at(name).data;
  }
  for (const std::string& name : opt_g_.state().names()) {
    opt_g_.state().at(name).data = checkpoint.at("opt_g." + name).data;
  }
  for (const std::string& name : opt_d_.state().names()) {
    opt_d_.state().at(name).data = checkpoint.at("opt_d." + name).data;
  }
  const Array& tr = checkpoint.at("meta.train");
  bootstrap_done_ = static_cast<int>(tr.data[1]);
  iters_done_ = static_cast<long long>(tr.data[2]);
  opt_g_.set_step_count(static_cast<std::int64_t>(tr.data[3]));
  opt_d_.set_step_count(static_cast<std::int64_t>(tr.data[4]));
}

ParamStore TrainSession::export_checkpoint() const {
  ParamStore out;
  const ParamStore& p = model_.params();
  for (const std::string& name : p.names()) {
    Array& a = out.add(name, p.at(name).shape);
    a.data = p.at(name).data;
  }
  for (const std::string& name : opt_g_.state().names()) {
    Array& a = out.add("opt_g." + name, opt_g_.state().at(name).shape);
    a.data = opt_g_.state().at(name).data;
  }
  for (const std::string& name : opt_d_.state().names()) {
    Array& a = out.add("opt_d." + name, opt_d_.state().at(name).shape);
    a.data = opt_d_.state().at(name).data;
  }
  const ModelConfig& mc = cfg_.model;
  Array& ch = out.add("meta.conv_channels", {mc.conv_channels.size()});
  for (size_t i = 0; i < mc.conv_channels.size(); ++i) ch.data[i] = mc.conv_channels[i];
  Array& ms = out.add("meta.model", {11});
  ms.data = {static_cast<double>(mc.hidden), static_cast<double>(mc.layers), mc.dropout,
             static_cast<double>(mc.max_len), mc.eos_threshold, mc.alpha,
             mc.freeze_encoder ? 1.0 : 0.0, mc.saturating_gan_loss ? 1.0 : 0.0, mc.bn_eps,
             mc.bn_momentum, mc.d_input_noise};
  Array& tr = out.add("meta.train", {5});
  tr.data = {static_cast<double>(cfg_.seed), static_cast<double>(bootstrap_done_),
             static_cast<double>(iters_done_), static_cast<double>(opt_g_.step_count()),
             static_cast<double>(opt_d_.step_count())};
  Array& pp = out.add("meta.preprocess", {5});
  pp.data = {static_cast<double>(cfg_.image_width), static_cast<double>(cfg_.image_height),
             data_.mean_pixel[0], data_.mean_pixel[1], data_.mean_pixel[2]};
  return out;
}

std::vector<int> TrainSession::sample_batch(Rng& rng) const {
  std::vector<int> batch(static_cast<size_t>(cfg_.minibatch));
  for (int& idx : batch) {
    idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(data_.train.size())));
  }
  return batch;
}

namespace {

std::vector<StepOutput> jitter_sequence(const std::vector<StepOutput>& seq, double sigma,
                                        Rng& rng) {
  if (sigma <= 0.0) return seq;
  std::vector<StepOutput> out = seq;
  for (StepOutput& s : out) {
    s.x += rng.normal(0.0, sigma);
    s.y += rng.normal(0.0, sigma);
    s.dt += rng.normal(0.0, sigma);
    s.eos += rng.normal(0.0, sigma);
  }
  return out;
}

}  // namespace

void TrainSession::bootstrap_epoch(int epoch) {
  const size_t n = data_.train.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(cfg_.seed, "boot_shuffle", static_cast<std::uint64_t>(epoch)));
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

  ParamStore grads = model_.params().zeros_like();
  double loss_sum = 0.0;
  for (size_t start = 0; start < n; start += static_cast<size_t>(cfg_.minibatch)) {
    const size_t end = std::min(n, start + static_cast<size_t>(cfg_.minibatch));
    const double inv_b = 1.0 / static_cast<double>(end - start);
    grads.zero();
    for (size_t k = start; k < end; ++k) {
      const auto& [img_idx, gt] = data_.train[order[k]];
      Rng drop_rng(derive_seed(cfg_.seed, "boot_drop", static_cast<std::uint64_t>(epoch),
                               static_cast<std::uint64_t>(k)));
      PathganModel::GenCache cache;
      const std::vector<StepOutput> preds =
          model_.generator_teacher_forced(data_.images[img_idx], gt, PassMode::Train, drop_rng,
                                          &cache);
      const std::vector<std::array<double, 4>> targets = scanpath_targets(gt);
      loss_sum += content_loss(preds, targets);
      std::vector<std::array<double, 4>> d_preds(preds.size(), {0, 0, 0, 0});
      content_loss_backward(preds, targets, inv_b, d_preds);
      model_.generator_backward(d_preds, grads, cache);
      model_.absorb_generator_bn(cache);
    }
    opt_g_.step(model_.params(), grads);
  }

  TrainLogRow row;
  row.iteration = epoch;
  row.phase = "bootstrap";
  row.content_loss = loss_sum / static_cast<double>(n);
  log_.rows.push_back(row);
}

void TrainSession::bootstrap_phase() {
  for (int e = bootstrap_done_; e < cfg_.bootstrap_epochs; ++e) {
    bootstrap_epoch(e);
    ++bootstrap_done_;
  }
}

void TrainSession::adversarial_iteration() {
  const auto it = static_cast<std::uint64_t>(iters_done_);
  const double inv_b = 1.0 / static_cast<double>(cfg_.minibatch);
  ParamStore grads = model_.params().zeros_like();

  double d_loss_sum = 0.0, acc_real = 0.0, acc_fake = 0.0;
  int d_samples = 0;
  for (int d = 0; d < cfg_.d_updates; ++d) {
    Rng batch_rng(derive_seed(cfg_.seed, "d_batch", it, static_cast<std::uint64_t>(d)));
    const std::vector<int> batch = sample_batch(batch_rng);
    grads.zero();
    for (size_t s = 0; s < batch.size(); ++s) {
      const auto& [img_idx, gt] = data_.train[static_cast<size_t>(batch[s])];
      const Image& img = data_.images[img_idx];
      const std::uint64_t tag = static_cast<std::uint64_t>(d) * 65536 + s;

      const std::vector<std::array<double, 4>> targets = scanpath_targets(gt);
      std::vector<StepOutput> real(targets.size());
      for (size_t i = 0; i < targets.size(); ++i) {
        real[i] = {targets[i][0], targets[i][1], targets[i][2], targets[i][3]};
      }
      Rng fake_rng(derive_seed(cfg_.seed, "d_fake_gen", it, tag));
      const std::vector<StepOutput> fake =
          model_.generator_teacher_forced(img, gt, PassMode::Train, fake_rng, nullptr);

      // both sides receive the same instance noise before scoring
      Rng noise_rng(derive_seed(cfg_.seed, "d_noise", it, tag));
      const std::vector<StepOutput> real_in =
          jitter_sequence(real, cfg_.model.d_input_noise, noise_rng);
      const std::vector<StepOutput> fake_in =
          jitter_sequence(fake, cfg_.model.d_input_noise, noise_rng);

      Rng real_rng(derive_seed(cfg_.seed, "d_real_drop", it, tag));
      PathganModel::DiscCache creal;
      const double p_real =
          model_.discriminator_score(img, real_in, PassMode::Train, real_rng, &creal);
      Rng fdrop_rng(derive_seed(cfg_.seed, "d_fake_drop", it, tag));
      PathganModel::DiscCache cfake;
      const double p_fake =
          model_.discriminator_score(img, fake_in, PassMode::Train, fdrop_rng, &cfake);

      d_loss_sum += adversarial_losses(p_real, p_fake, cfg_.model.saturating_gan_loss).d_loss;
      acc_real += p_real > 0.5 ? 1.0 : 0.0;
      acc_fake += p_fake < 0.5 ? 1.0 : 0.0;
      ++d_samples;

      model_.discriminator_backward(d_loss_wrt_real(p_real) * inv_b, &grads, creal, false);
      model_.discriminator_backward(d_loss_wrt_fake(p_fake) * inv_b, &grads, cfake, false);
      model_.absorb_discriminator_bn(creal);
      model_.absorb_discriminator_bn(cfake);
    }
    opt_d_.step(model_.params(), grads);
  }

  double g_loss_sum = 0.0, content_sum = 0.0;
  int g_samples = 0;
  for (int g = 0; g < cfg_.g_updates; ++g) {
    Rng batch_rng(derive_seed(cfg_.seed, "g_batch", it, static_cast<std::uint64_t>(g)));
    const std::vector<int> batch = sample_batch(batch_rng);
    grads.zero();
    for (size_t s = 0; s < batch.size(); ++s) {
      const auto& [img_idx, gt] = data_.train[static_cast<size_t>(batch[s])];
      const Image& img = data_.images[img_idx];
      const std::uint64_t tag = static_cast<std::uint64_t>(g) * 65536 + s;

      Rng gen_rng(derive_seed(cfg_.seed, "g_drop", it, tag));
      PathganModel::GenCache gcache;
      const std::vector<StepOutput> preds =
          model_.generator_teacher_forced(img, gt, PassMode::Train, gen_rng, &gcache);
      // additive noise: gradients w.r.t. the noisy input apply to preds as-is
      Rng noise_rng(derive_seed(cfg_.seed, "g_noise", it, tag));
      const std::vector<StepOutput> noisy =
          jitter_sequence(preds, cfg_.model.d_input_noise, noise_rng);
      Rng disc_rng(derive_seed(cfg_.seed, "g_disc_drop", it, tag));
      PathganModel::DiscCache dcache;
      const double p_fake =
          model_.discriminator_score(img, noisy, PassMode::Train, disc_rng, &dcache);

      const std::vector<std::array<double, 4>> targets = scanpath_targets(gt);
      const double content = content_loss(preds, targets);
      g_loss_sum += adversarial_losses(p_fake, p_fake, cfg_.model.saturating_gan_loss).g_loss;
      content_sum += content;
      ++g_samples;

      // combined objective: adversarial term plus alpha * content term
      std::vector<std::array<double, 4>> d_preds = model_.discriminator_backward(
          g_loss_wrt_fake(p_fake, cfg_.model.saturating_gan_loss) * inv_b, nullptr, dcache, true);
      if (cfg_.adv_grad_cap > 0.0) {
        double peak = 0.0;
        for (const auto& dp : d_preds) {
          for (double v : dp) peak = std::max(peak, std::fabs(v));
        }
        if (peak > cfg_.adv_grad_cap) {
          const double scale = cfg_.adv_grad_cap / peak;
          for (auto& dp : d_preds) {
            for (double& v : dp) v *= scale;
          }
        }
      }
      content_loss_backward(preds, targets, cfg_.model.alpha * inv_b, d_preds);
      model_.generator_backward(d_preds, grads, gcache);
      model_.absorb_generator_bn(gcache);
    }
    opt_g_.step(model_.params(), grads);
  }

  TrainLogRow row;
  row.iteration = iters_done_;
  row.phase = "adv";
  row.content_loss = content_sum / static_cast<double>(g_samples);
  row.d_loss = d_loss_sum / static_cast<double>(d_samples);
  row.g_loss = g_loss_sum / static_cast<double>(g_samples);
  row.d_acc_real = acc_real / static_cast<double>(d_samples);
  row.d_acc_fake = acc_fake / static_cast<double>(d_samples);
  log_.rows.push_back(row);
  ++iters_done_;
}

double TrainSession::validation_content_loss() {
  Rng dummy(0);
  double sum = 0.0;
  for (const auto& [img_idx, gt] : data_.val) {
    const std::vector<StepOutput> preds = model_.generator_teacher_forced(
        data_.images[img_idx], gt, PassMode::Frozen, dummy, nullptr);
    sum += content_loss(preds, gt);
  }
  return sum / static_cast<double>(data_.val.size());
}

TrainLogRow TrainSession::validation_pass() {
  TrainLogRow row;
  row.iteration = iters_done_;
  row.phase = "val";
  row.content_loss = validation_content_loss();

  if (cfg_.val_k > 0) {
    GtSet gt_by_image;
    for (const auto& [img_idx, gt] : data_.val) gt_by_image[data_.image_ids[img_idx]].push_back(gt);
    std::map<std::string, int> id_index;
    for (int idx : data_.val_images) id_index[data_.image_ids[idx]] = idx;
    double sum = 0.0;
    int n = 0;
    const Geometry geom{cfg_.geometry};
    for (const auto& [id, gts] : gt_by_image) {
      std::vector<Scanpath> preds;
      for (int k = 0; k < cfg_.val_k; ++k) {
        Rng rng(derive_seed(cfg_.seed, "val_gen",
                            static_cast<std::uint64_t>(iters_done_) * 4096 +
                                static_cast<std::uint64_t>(id_index[id]),
                            static_cast<std::uint64_t>(k)));
        preds.push_back(model_.generator_rollout(data_.images[id_index[id]], id, rng).path);
      }
      sum += match_scanpaths(preds, gts, geom).second;
      ++n;
    }
    row.val_jarodzka = sum / static_cast<double>(n);
  }
  log_.rows.push_back(row);
  return row;
}

std::string TrainSession::final_checkpoint_path() const {
  return (fs::path(cfg_.out_dir) / "ckpt_final.txt").string();
}

void TrainSession::run() {
  if (!cfg_.out_dir.empty()) fs::create_directories(cfg_.out_dir);

  if (bootstrap_done_ == 0 && iters_done_ == 0 && log_.rows.empty()) {
    validation_pass();  // pre-training reference point
  }
  if (bootstrap_done_ < cfg_.bootstrap_epochs) {
    bootstrap_phase();
    validation_pass();
  }

  long long validations = 0;
  while (iters_done_ < cfg_.iterations) {
    adversarial_iteration();
    if (iters_done_ % cfg_.val_every == 0) {
      validation_pass();
      ++validations;
      if (!cfg_.out_dir.empty() && validations % cfg_.ckpt_every == 0) {
        save_checkpoint((fs::path(cfg_.out_dir) / ("ckpt_iter_" + std::to_string(iters_done_) +
                                                   ".txt")).string(),
                        export_checkpoint());
      }
    }
  }
  if (cfg_.iterations == 0 || cfg_.iterations % cfg_.val_every != 0) {
    validation_pass();
  }

  if (!cfg_.out_dir.empty()) {
    save_checkpoint(final_checkpoint_path(), export_checkpoint());
    write_text_file((fs::path(cfg_.out_dir) / "train_log.csv").string(), log_.to_csv());
  }
}

// ---------------------------------------------------------------------------
// Checkpoint consumers

LoadedModel load_model_checkpoint(const std::string& path) {
  const ParamStore ckpt = load_checkpoint(path);
  const ModelConfig mc = model_config_from_checkpoint(ckpt);
  const Array& tr = ckpt.at("meta.train");
  const Array& pp = ckpt.at("meta.preprocess");
  LoadedModel out{mc, PathganModel(mc, static_cast<std::uint64_t>(tr.data[0])),
                  {pp.data[2], pp.data[3], pp.data[4]},
                  static_cast<int>(pp.data[0]), static_cast<int>(pp.data[1]),
                  static_cast<std::uint64_t>(tr.data[0])};
  for (const std::string& name : out.model.params().names()) {
    out.model.params().at(name).data = ckpt.at(name).data;
  }
  return out;
}

std::vector<Scanpath> generate_scanpaths(const PathganModel& model, const Image& img,
                                         const std::string& image_id, int k, std::uint64_t seed) {
  std::vector<Scanpath> out;
  out.reserve(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    Rng rng(derive_seed(seed, "gen", fnv1a64(image_id), static_cast<std::uint64_t>(j)));
    out.push_back(model.generator_rollout(img, image_id, rng).path);
  }
  return out;
}

}  // namespace pathgan
