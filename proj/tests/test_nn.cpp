#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "pathgan/error.hpp"
#include "pathgan/kernels.hpp"
#include "pathgan/nn/checkpoint.hpp"
#include "pathgan/nn/losses.hpp"
#include "pathgan/nn/model.hpp"
#include "pathgan/nn/rmsprop.hpp"
#include "pathgan/rng.hpp"

using namespace pathgan;

namespace {

Image random_image(Rng& rng, int w, int h) {
  Image img(w, h, 3);
  for (double& v : img.data) v = rng.uniform(-0.5, 0.5);
  return img;
}

Scanpath random_gt(Rng& rng, int n) {
  Scanpath sp;
  sp.image_id = "img";
  double t = 0;
  for (int i = 0; i < n; ++i) {
    sp.fixations.push_back({rng.uniform(), rng.uniform(), t});
    t += rng.uniform(0.1, 0.4);
  }
  return sp;
}

ModelConfig tiny_config() {
  ModelConfig mc;
  mc.conv_channels = {4, 6};
  mc.hidden = 8;
  mc.layers = 2;
  mc.dropout = 0.1;
  return mc;
}

}  // namespace

// ---------------------------------------------------------------------------
// kernels: every available lane agrees with a compensated-sum reference

TEST_CASE("kernel lanes are equivalent to the scalar reference") {
  Rng rng(2718);
  INFO("active lane: ", kernels::active_lane());
  for (const std::size_t n : {1UL, 3UL, 7UL, 8UL, 17UL, 64UL, 253UL, 1024UL}) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-2, 2);
      y[i] = rng.uniform(-2, 2);
    }
    // Kahan-compensated dot as the reference
    double ref = 0.0, comp = 0.0, absmass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double term = x[i] * y[i] - comp;
      const double next = ref + term;
      comp = (next - ref) - term;
      ref = next;
      absmass += std::fabs(x[i] * y[i]);
    }
    for (const kernels::KernelTable* lane : kernels::available_lanes()) {
      INFO("lane: ", lane->name, " n: ", n);
      CHECK(std::fabs(lane->dot(x.data(), y.data(), n) - ref) <= 1e-12 * (1.0 + absmass));
      CHECK(std::fabs(lane->sumsq(x.data(), x.data() ? n : n) -
                      kernels::scalar::sumsq(x.data(), n)) <= 1e-12 * (1.0 + absmass));

      std::vector<double> a = y, b = y;
      lane->axpy(1.75, x.data(), a.data(), n);
      kernels::scalar::axpy(1.75, x.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-13 * (1 + std::fabs(b[i])));

      a = y;
      b = y;
      lane->scale(0.37, a.data(), n);
      kernels::scalar::scale(0.37, b.data(), n);
      CHECK(a == b);

      a = y;
      b = y;
      lane->add(x.data(), a.data(), n);
      kernels::scalar::add(x.data(), b.data(), n);
      CHECK(a == b);

      a = y;
      b = y;
      lane->hadamard(x.data(), a.data(), n);
      kernels::scalar::hadamard(x.data(), b.data(), n);
      CHECK(a == b);
    }
  }
}

TEST_CASE("matvec composites match naive loops") {
  Rng rng(31415);
  const std::size_t m = 13, n = 29;
  std::vector<double> A(m * n), x(n), b(m), y(m);
  for (double& v : A) v = rng.uniform(-1, 1);
  for (double& v : x) v = rng.uniform(-1, 1);
  for (double& v : b) v = rng.uniform(-1, 1);
  kernels::matvec(A.data(), x.data(), b.data(), y.data(), m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < n; ++j) s += A[i * n + j] * x[j];
    CHECK(y[i] == doctest::Approx(s).epsilon(1e-12));
  }

  std::vector<double> xa(n, 0.0);
  kernels::matvec_t_acc(A.data(), y.data(), xa.data(), m, n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += A[i * n + j] * y[i];
    CHECK(xa[j] == doctest::Approx(s).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------------------
// RMSprop

TEST_CASE("rmsprop closed-form single and double step") {
  RmspropConfig cfg;  // lr 1e-4, rho 0.9, eps 1e-8
  std::vector<double> theta = {0.0}, acc = {0.0};
  const std::vector<double> g = {1.0};
  rmsprop_step(theta, g, acc, cfg);
  CHECK(std::fabs(acc[0] - 0.1) <= 1e-10);
  const double expect1 = -1e-4 / (std::sqrt(0.1) + 1e-8);
  CHECK(std::fabs(theta[0] - expect1) <= 1e-10);

  rmsprop_step(theta, g, acc, cfg);
  CHECK(std::fabs(acc[0] - 0.19) <= 1e-10);
  const double expect2 = expect1 - 1e-4 / (std::sqrt(0.19) + 1e-8);
  CHECK(std::fabs(theta[0] - expect2) <= 1e-10);

  // zero gradient: parameters hold still, accumulator decays by rho
  const double held = theta[0];
  const double acc2 = acc[0];
  std::vector<double> z = {0.0};
  rmsprop_step(theta, z, acc, cfg);
  CHECK(theta[0] == held);
  CHECK(acc[0] == 0.9 * acc2);

  std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_AS(rmsprop_step(theta, wrong, acc, cfg), Error);
}

TEST_CASE("Rmsprop updates only trainable arrays under its prefix") {
  ParamStore params;
  params.add("gen.w", {2}).data = {1.0, 1.0};
  params.add("gen.bn.rmean", {2}, false).data = {3.0, 3.0};
  params.add("disc.w", {2}).data = {2.0, 2.0};
  ParamStore grads = params.zeros_like();
  grads.at("gen.w").data = {1.0, 1.0};
  grads.at("disc.w").data = {1.0, 1.0};

  Rmsprop opt(RmspropConfig{}, params, "gen.");
  opt.step(params, grads);
  CHECK(opt.step_count() == 1);
  CHECK(params.at("gen.w").data[0] != 1.0);
  CHECK(params.at("disc.w").data[0] == 2.0);       // other prefix untouched
  CHECK(params.at("gen.bn.rmean").data[0] == 3.0); // non-trainable untouched
}

// ---------------------------------------------------------------------------
// losses

TEST_CASE("scanpath_targets expands positions, durations and eos") {
  Scanpath gt;
  gt.image_id = "img";
  gt.fixations = {{0.1, 0.2, 0.0}, {0.3, 0.4, 0.2}, {0.5, 0.6, 0.5}};
  const auto t = scanpath_targets(gt);
  REQUIRE(t.size() == 3);
  CHECK(t[0][0] == 0.1);
  CHECK(t[0][2] == doctest::Approx(0.2));
  CHECK(t[2][2] == doctest::Approx(0.25));
  CHECK(t[0][3] == 0.0);
  CHECK(t[1][3] == 0.0);
  CHECK(t[2][3] == 1.0);
}

TEST_CASE("content loss: identity, direct arithmetic, mean semantics") {
  std::vector<StepOutput> pred = {{0.1, 0.2, 0.3, 0.0}};
  std::vector<std::array<double, 4>> tgt = {{0.1, 0.2, 0.3, 0.0}};
  CHECK(content_loss(pred, tgt) == 0.0);

  pred = {{1.0, 1.0, 1.0, 1.0}};
  tgt = {{0.0, 0.0, 0.0, 0.0}};
  CHECK(content_loss(pred, tgt) == 4.0);

  // concatenating two equal-length sequences averages their losses
  std::vector<StepOutput> p2 = {{1.0, 0, 0, 0}, {0, 1.0, 0, 0}};
  std::vector<std::array<double, 4>> t2 = {{0, 0, 0, 0}, {0, 0, 0, 0}};
  const double l1 = content_loss({p2[0]}, {t2[0]});
  const double l2 = content_loss({p2[1]}, {t2[1]});
  CHECK(content_loss(p2, t2) == doctest::Approx(0.5 * (l1 + l2)).epsilon(1e-14));

  CHECK_THROWS_AS(content_loss(p2, tgt), Error);
}

TEST_CASE("adversarial losses: documented values and limits") {
  const AdvLosses mid = adversarial_losses(0.5, 0.5);
  CHECK(mid.d_loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  const AdvLosses good = adversarial_losses(0.9, 0.1);
  CHECK(good.d_loss == doctest::Approx(-2.0 * std::log(0.9)).epsilon(1e-12));
  CHECK(good.d_loss == doctest::Approx(0.21072103131565256).epsilon(1e-10));

  CHECK(adversarial_losses(0.5, 0.999999).g_loss ==
        doctest::Approx(0.0).epsilon(1e-5));  // d_fake -> 1 drives -log to 0+
  CHECK(adversarial_losses(0.5, 1.0).g_loss > 0.0);  // clipped, stays finite
  CHECK(std::isfinite(adversarial_losses(0.0, 1.0).d_loss));

  CHECK(combined_generator_loss(1.0, 0.0, 0.05) == 1.0);
  CHECK(combined_generator_loss(0.0, 2.0, 0.05) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(combined_generator_loss(0.7, 2.0, 0.0) == 0.7);
}

// ---------------------------------------------------------------------------
// model behaviors

TEST_CASE("encoder: fixed-size features, determinism, zero image") {
  const ModelConfig mc = tiny_config();
  PathganModel model(mc, 1);
  Rng rng(5);
  const Image a = random_image(rng, 16, 16);
  const Image b = random_image(rng, 20, 12);
  const auto fa = model.encode_image(a);
  const auto fb = model.encode_image(b);
  CHECK(fa.size() == static_cast<size_t>(mc.feature_dim()));
  CHECK(fb.size() == static_cast<size_t>(mc.feature_dim()));
  CHECK(model.encode_image(a) == fa);  // no noise in the encoder

  const Image zero(16, 16, 3, 0.0);
  for (double v : model.encode_image(zero)) CHECK(v == 0.0);  // biases start at zero

  const Image small(3, 16, 3, 0.0);
  try {
    model.encode_image(small);
    FAIL("expected ImageTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::ImageTooSmall);
  }
}

TEST_CASE("teacher forcing: ranges, length contract, seeded determinism") {
  PathganModel model(tiny_config(), 2);
  Rng rng(6);
  const Image img = random_image(rng, 16, 16);

  for (int n : {1, 4, 7}) {
    const Scanpath gt = random_gt(rng, n);
    Rng r1(77), r2(77);
    const auto p1 = model.generator_teacher_forced(img, gt, PassMode::Train, r1, nullptr);
    const auto p2 = model.generator_teacher_forced(img, gt, PassMode::Train, r2, nullptr);
    REQUIRE(p1.size() == static_cast<size_t>(n));
    for (size_t i = 0; i < p1.size(); ++i) {
      CHECK(p1[i].x >= 0.0);
      CHECK(p1[i].x <= 1.0);
      CHECK(p1[i].y >= 0.0);
      CHECK(p1[i].y <= 1.0);
      CHECK(p1[i].dt >= 0.0);
      CHECK(p1[i].eos >= 0.0);
      CHECK(p1[i].eos <= 1.0);
      CHECK(p1[i].x == p2[i].x);
      CHECK(p1[i].eos == p2[i].eos);
    }
  }
}

TEST_CASE("rollout: cap, validity, dropout-driven diversity, p=0 determinism") {
  ModelConfig mc = tiny_config();
  mc.max_len = 9;
  PathganModel model(mc, 3);
  Rng rng(8);
  const Image img = random_image(rng, 16, 16);

  int differing = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng ra(1000 + trial), rb(5000 + trial);
    const auto a = model.generator_rollout(img, "img", ra);
    const auto b = model.generator_rollout(img, "img", rb);
    CHECK(a.path.size() <= 9);
    CHECK(a.eos.size() == a.path.size());
    CHECK_NOTHROW(validate_scanpath(a.path));
    for (size_t i = 1; i < a.path.fixations.size(); ++i) {
      CHECK(a.path.fixations[i].t >= a.path.fixations[i - 1].t);
    }
    const bool same = a.path.size() == b.path.size() &&
                      [&] {
                        for (size_t i = 0; i < a.path.size(); ++i) {
                          if (a.path.fixations[i].x != b.path.fixations[i].x) return false;
                        }
                        return true;
                      }();
    if (!same) ++differing;
  }
  CHECK(differing >= 19);

  ModelConfig det = tiny_config();
  det.dropout = 0.0;
  det.max_len = 9;
  PathganModel dmodel(det, 3);
  Rng r1(1), r2(999);
  const auto a = dmodel.generator_rollout(img, "img", r1);
  const auto b = dmodel.generator_rollout(img, "img", r2);
  REQUIRE(a.path.size() == b.path.size());
  for (size_t i = 0; i < a.path.size(); ++i) {
    CHECK(a.path.fixations[i].x == b.path.fixations[i].x);
    CHECK(a.path.fixations[i].t == b.path.fixations[i].t);
  }
}

TEST_CASE("discriminator: sigmoid range, zero-head gives 0.5, determinism") {
  PathganModel model(tiny_config(), 4);
  Rng rng(9);
  const Image img = random_image(rng, 16, 16);
  std::vector<StepOutput> seq = {{0.2, 0.3, 0.25, 0.0}, {0.6, 0.7, 0.3, 1.0}};

  Rng r1(11), r2(11);
  const double p1 = model.discriminator_score(img, seq, PassMode::Train, r1, nullptr);
  const double p2 = model.discriminator_score(img, seq, PassMode::Train, r2, nullptr);
  CHECK(p1 > 0.0);
  CHECK(p1 < 1.0);
  CHECK(p1 == p2);

  for (double& v : model.params().at("disc.head.w").data) v = 0.0;
  model.params().at("disc.head.b").data[0] = 0.0;
  Rng r3(13);
  CHECK(model.discriminator_score(img, seq, PassMode::Train, r3, nullptr) == 0.5);

  CHECK_THROWS_AS(model.discriminator_score(img, {}, PassMode::Train, r3, nullptr), Error);
}

TEST_CASE("batch-norm eval mode is batch-size independent") {
  PathganModel model(tiny_config(), 5);
  Rng rng(10);
  const Image img = random_image(rng, 16, 16);
  const Scanpath gt = random_gt(rng, 5);

  Rng unused(0);
  const auto alone = model.generator_teacher_forced(img, gt, PassMode::Frozen, unused, nullptr);
  std::vector<std::vector<StepOutput>> batch;
  for (int i = 0; i < 8; ++i) {
    batch.push_back(model.generator_teacher_forced(img, gt, PassMode::Frozen, unused, nullptr));
  }
  for (const auto& preds : batch) {
    for (size_t i = 0; i < preds.size(); ++i) {
      CHECK(std::fabs(preds[i].x - alone[i].x) <= 1e-10);
      CHECK(std::fabs(preds[i].dt - alone[i].dt) <= 1e-10);
    }
  }
}

// ---------------------------------------------------------------------------
// gradients

namespace {

struct Scene {
  Image img;
  Scanpath gt;
};

Scene make_scene(std::uint64_t seed) {
  Rng rng(seed);
  Scene s{random_image(rng, 16, 16), random_gt(rng, 3)};
  return s;
}

// combined generator objective with fixed dropout seeds
double combined_loss(PathganModel& m, const Scene& s) {
  Rng grng(derive_seed(99, "g"));
  const auto preds = m.generator_teacher_forced(s.img, s.gt, PassMode::Train, grng, nullptr);
  Rng drng(derive_seed(99, "d"));
  const double p_fake = m.discriminator_score(s.img, preds, PassMode::Train, drng, nullptr);
  return adversarial_losses(p_fake, p_fake).g_loss +
         m.config().alpha * content_loss(preds, s.gt);
}

double disc_loss(PathganModel& m, const Scene& s) {
  const auto targets = scanpath_targets(s.gt);
  std::vector<StepOutput> real(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    real[i] = {targets[i][0], targets[i][1], targets[i][2], targets[i][3]};
  }
  Rng frng(derive_seed(99, "fake"));
  const auto fake = m.generator_teacher_forced(s.img, s.gt, PassMode::Train, frng, nullptr);
  Rng rrng(derive_seed(99, "dr"));
  const double p_real = m.discriminator_score(s.img, real, PassMode::Train, rrng, nullptr);
  Rng drng(derive_seed(99, "df"));
  const double p_fake = m.discriminator_score(s.img, fake, PassMode::Train, drng, nullptr);
  return adversarial_losses(p_real, p_fake).d_loss;
}

// analytic gradients mirroring the two losses above
ParamStore combined_loss_grads(PathganModel& m, const Scene& s) {
  ParamStore grads = m.params().zeros_like();
  Rng grng(derive_seed(99, "g"));
  PathganModel::GenCache gc;
  const auto preds = m.generator_teacher_forced(s.img, s.gt, PassMode::Train, grng, &gc);
  Rng drng(derive_seed(99, "d"));
  PathganModel::DiscCache dc;
  const double p_fake = m.discriminator_score(s.img, preds, PassMode::Train, drng, &dc);
  auto d_preds = m.discriminator_backward(g_loss_wrt_fake(p_fake), nullptr, dc, true);
  content_loss_backward(preds, scanpath_targets(s.gt), m.config().alpha, d_preds);
  m.generator_backward(d_preds, grads, gc);
  return grads;
}

ParamStore disc_loss_grads(PathganModel& m, const Scene& s) {
  ParamStore grads = m.params().zeros_like();
  const auto targets = scanpath_targets(s.gt);
  std::vector<StepOutput> real(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    real[i] = {targets[i][0], targets[i][1], targets[i][2], targets[i][3]};
  }
  Rng frng(derive_seed(99, "fake"));
  const auto fake = m.generator_teacher_forced(s.img, s.gt, PassMode::Train, frng, nullptr);
  Rng rrng(derive_seed(99, "dr"));
  PathganModel::DiscCache cr;
  const double p_real = m.discriminator_score(s.img, real, PassMode::Train, rrng, &cr);
  Rng drng(derive_seed(99, "df"));
  PathganModel::DiscCache cf;
  const double p_fake = m.discriminator_score(s.img, fake, PassMode::Train, drng, &cf);
  m.discriminator_backward(d_loss_wrt_real(p_real), &grads, cr, false);
  m.discriminator_backward(d_loss_wrt_fake(p_fake), &grads, cf, false);
  return grads;
}

template <typename LossFn>
void check_block_gradients(PathganModel& model, const Scene& scene, const ParamStore& analytic,
                           const std::string& prefix, LossFn loss, int probes = 5) {
  const double h = 1e-5;
  for (const std::string& name : model.params().names()) {
    if (name.rfind(prefix, 0) != 0 || !model.params().trainable(name)) continue;
    const Array& g = analytic.at(name);
    // probe the largest-magnitude entries: deterministic and well conditioned
    std::vector<size_t> idx(g.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return std::fabs(g.data[a]) > std::fabs(g.data[b]); });
    const int count = std::min<int>(probes, static_cast<int>(idx.size()));
    for (int k = 0; k < count; ++k) {
      const size_t i = idx[static_cast<size_t>(k)];
      double& theta = model.params().at(name).data[i];
      const double keep = theta;
      theta = keep + h;
      const double up = loss(model, scene);
      theta = keep - h;
      const double down = loss(model, scene);
      theta = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::fabs(numeric - g.data[i]) /
                         std::max({1e-6, std::fabs(numeric), std::fabs(g.data[i])});
      INFO("block ", name, " index ", i, " analytic ", g.data[i], " numeric ", numeric);
      CHECK(rel < 1e-4);
    }
  }
}

}  // namespace

TEST_CASE("analytic gradients match central differences on every block type") {
  PathganModel model(tiny_config(), 42);
  const Scene scene = make_scene(1001);

  const ParamStore ggrads = combined_loss_grads(model, scene);
  check_block_gradients(model, scene, ggrads, "gen.",
                        [](PathganModel& m, const Scene& s) { return combined_loss(m, s); });

  const ParamStore dgrads = disc_loss_grads(model, scene);
  check_block_gradients(model, scene, dgrads, "disc.",
                        [](PathganModel& m, const Scene& s) { return disc_loss(m, s); });
}

TEST_CASE("zero adjoint produces exactly zero gradients") {
  PathganModel model(tiny_config(), 43);
  const Scene scene = make_scene(1002);
  Rng rng(7);
  PathganModel::GenCache gc;
  const auto preds =
      model.generator_teacher_forced(scene.img, scene.gt, PassMode::Train, rng, &gc);
  ParamStore grads = model.params().zeros_like();
  std::vector<std::array<double, 4>> zero(preds.size(), {0, 0, 0, 0});
  model.generator_backward(zero, grads, gc);
  for (const std::string& name : grads.names()) {
    for (double v : grads.at(name).data) CHECK(v == 0.0);
  }
}

TEST_CASE("combined-loss gradient is the sum of its parts") {
  PathganModel model(tiny_config(), 44);
  const Scene scene = make_scene(1003);

  Rng grng(derive_seed(99, "g"));
  PathganModel::GenCache gc;
  const auto preds =
      model.generator_teacher_forced(scene.img, scene.gt, PassMode::Train, grng, &gc);
  Rng drng(derive_seed(99, "d"));
  PathganModel::DiscCache dc;
  const double p_fake = model.discriminator_score(scene.img, preds, PassMode::Train, drng, &dc);
  const auto targets = scanpath_targets(scene.gt);
  const double alpha = model.config().alpha;

  ParamStore combined = model.params().zeros_like();
  {
    auto d_preds = model.discriminator_backward(g_loss_wrt_fake(p_fake), nullptr, dc, true);
    content_loss_backward(preds, targets, alpha, d_preds);
    model.generator_backward(d_preds, combined, gc);
  }
  ParamStore adv = model.params().zeros_like();
  {
    auto d_preds = model.discriminator_backward(g_loss_wrt_fake(p_fake), nullptr, dc, true);
    model.generator_backward(d_preds, adv, gc);
  }
  ParamStore content = model.params().zeros_like();
  {
    std::vector<std::array<double, 4>> d_preds(preds.size(), {0, 0, 0, 0});
    content_loss_backward(preds, targets, 1.0, d_preds);
    model.generator_backward(d_preds, content, gc);
  }
  for (const std::string& name : combined.names()) {
    const auto& c = combined.at(name).data;
    const auto& a = adv.at(name).data;
    const auto& b = content.at(name).data;
    for (size_t i = 0; i < c.size(); ++i) {
      CHECK(std::fabs(c[i] - (a[i] + alpha * b[i])) <= 1e-10);
    }
  }
}

TEST_CASE("model parameters round-trip through the checkpoint format") {
  PathganModel model(tiny_config(), 45);
  const std::string text = checkpoint_to_string(model.params());
  const ParamStore back = checkpoint_from_string(text);
  for (const std::string& name : model.params().names()) {
    CHECK(back.at(name).data == model.params().at(name).data);
  }
}
