#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rng.hpp"
#include "tensor.hpp"

using namespace seqnas;

namespace {

Tensor4 random_tensor(int n, int c, int h, int w, uint64_t seed, float lo = -1.0f,
                      float hi = 1.0f) {
  Tensor4 t(n, c, h, w);
  SplitMix64 rng(seed);
  for (auto& v : t.v) v = rng.next_uniform(lo, hi);
  return t;
}

double weighted_sum(const Tensor4& y, const Tensor4& coef) {
  REQUIRE(y.same_shape(coef));
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s += static_cast<double>(y.v[i]) * coef.v[i];
  return s;
}

}  // namespace

TEST_CASE("conv2d_fwd matches the direct reference") {
  struct Case {
    int n, c, h, w, oc, k;
    Conv2dSpec spec;
  };
  const Case cases[] = {
      {2, 3, 8, 10, 4, 3, {1, 1, 1, 1}},   // 3x3 same padding
      {1, 4, 9, 7, 6, 1, {1, 1, 0, 1}},    // pointwise
      {1, 4, 9, 7, 6, 1, {2, 2, 0, 1}},    // strided pointwise
      {2, 4, 8, 8, 4, 3, {2, 1, 1, 4}},    // depthwise, mixed stride
      {1, 3, 11, 9, 3, 5, {2, 2, 2, 3}},   // depthwise 5x5
      {1, 6, 6, 6, 4, 3, {1, 1, 1, 2}},    // grouped, 2 groups
  };
  uint64_t seed = 100;
  for (const Case& cs : cases) {
    const Tensor4 x = random_tensor(cs.n, cs.c, cs.h, cs.w, seed++);
    const Tensor4 wt = random_tensor(cs.oc, cs.c / cs.spec.groups, cs.k, cs.k, seed++);
    const Tensor4 got = conv2d_fwd(x, wt, cs.spec);
    const Tensor4 ref = oracle::conv_ref(x, wt, cs.spec);
    REQUIRE(got.same_shape(ref));
    for (size_t i = 0; i < got.size(); ++i)
      CHECK(oracle::close(got.v[i], ref.v[i], 1e-5, 1e-6));
  }
}

TEST_CASE("conv2d_bwd gradients agree with finite differences") {
  struct Case {
    int n, c, h, w, oc, k;
    Conv2dSpec spec;
  };
  const Case cases[] = {
      {1, 2, 5, 6, 3, 3, {2, 1, 1, 1}},  // strided, padded
      {2, 4, 6, 5, 4, 3, {2, 2, 1, 4}},  // depthwise
      {1, 3, 4, 4, 2, 1, {1, 1, 0, 1}},  // pointwise
  };
  uint64_t seed = 500;
  for (const Case& cs : cases) {
    Tensor4 x = random_tensor(cs.n, cs.c, cs.h, cs.w, seed++);
    Tensor4 wt = random_tensor(cs.oc, cs.c / cs.spec.groups, cs.k, cs.k, seed++);
    const Tensor4 y0 = conv2d_fwd(x, wt, cs.spec);
    const Tensor4 coef = random_tensor(y0.n, y0.c, y0.h, y0.w, seed++);

    Tensor4 dx(x.n, x.c, x.h, x.w), dw(wt.n, wt.c, wt.h, wt.w);
    conv2d_bwd(x, wt, coef, cs.spec, dx, dw);

    const auto loss = [&] { return weighted_sum(conv2d_fwd(x, wt, cs.spec), coef); };
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(oracle::close(dx.v[i], oracle::fd_slot(x.v[i], 1e-2, loss), 1e-3, 1e-5));
    for (size_t i = 0; i < wt.size(); ++i)
      CHECK(oracle::close(dw.v[i], oracle::fd_slot(wt.v[i], 1e-2, loss), 1e-3, 1e-5));
  }
}

TEST_CASE("conv2d_bwd accumulates into dw") {
  Tensor4 x = random_tensor(1, 2, 4, 4, 900);
  Tensor4 wt = random_tensor(2, 2, 3, 3, 901);
  const Conv2dSpec spec{1, 1, 1, 1};
  const Tensor4 dy = random_tensor(1, 2, 4, 4, 902);

  Tensor4 dx1(1, 2, 4, 4), dw_once(2, 2, 3, 3);
  conv2d_bwd(x, wt, dy, spec, dx1, dw_once);

  Tensor4 dx2(1, 2, 4, 4), dw_twice(2, 2, 3, 3);
  conv2d_bwd(x, wt, dy, spec, dx2, dw_twice);
  conv2d_bwd(x, wt, dy, spec, dx2, dw_twice);
  for (size_t i = 0; i < dw_once.size(); ++i)
    CHECK(oracle::close(dw_twice.v[i], 2.0 * dw_once.v[i], 1e-6, 1e-7));
}

TEST_CASE("relu6 forward and backward") {
  Tensor4 x(1, 1, 1, 7);
  x.v = {-2.0f, -0.3f, 0.5f, 3.0f, 5.9f, 6.4f, 8.0f};
  const Tensor4 y = relu6_fwd(x);
  const std::vector<float> want = {0.0f, 0.0f, 0.5f, 3.0f, 5.9f, 6.0f, 6.0f};
  for (size_t i = 0; i < want.size(); ++i) CHECK(y.v[i] == want[i]);

  Tensor4 dy(1, 1, 1, 7);
  dy.v.assign(7, 1.0f);
  const Tensor4 dx = relu6_bwd(x, dy);
  const std::vector<float> mask = {0.0f, 0.0f, 1.0f, 1.0f, 1.0f, 0.0f, 0.0f};
  for (size_t i = 0; i < mask.size(); ++i) CHECK(dx.v[i] == mask[i]);

  // Finite differences away from the kinks.
  Tensor4 xr(1, 2, 3, 3);
  SplitMix64 rng(77);
  for (auto& v : xr.v) {
    do {
      v = rng.next_uniform(-3.0f, 8.0f);
    } while (std::fabs(v) < 0.2f || std::fabs(v - 6.0f) < 0.2f);
  }
  const Tensor4 coef = random_tensor(1, 2, 3, 3, 78);
  const Tensor4 dxr = relu6_bwd(xr, coef);
  const auto loss = [&] { return weighted_sum(relu6_fwd(xr), coef); };
  for (size_t i = 0; i < xr.size(); ++i)
    CHECK(oracle::close(dxr.v[i], oracle::fd_slot(xr.v[i], 1e-2, loss), 1e-3, 1e-5));
}

TEST_CASE("frame cross-entropy matches a hand computation") {
  // One sample, two classes, one frame: logits (0, ln 3) -> probs (1/4, 3/4).
  Tensor4 logits(1, 2, 1, 1);
  logits.at(0, 0, 0, 0) = 0.0f;
  logits.at(0, 1, 0, 0) = std::log(3.0f);
  const CeResult res = frame_softmax_ce(logits, {1});
  CHECK(res.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-6));
  CHECK(res.dlogits.at(0, 0, 0, 0) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(res.dlogits.at(0, 1, 0, 0) == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("frame cross-entropy averages frames and matches finite differences") {
  const int batch = 2, classes = 4, frames = 3;
  Tensor4 logits = random_tensor(batch, classes, 1, frames, 314, -2.0f, 2.0f);
  std::vector<int> labels;
  SplitMix64 rng(315);
  for (int i = 0; i < batch * frames; ++i)
    labels.push_back(static_cast<int>(rng.next_below(classes)));

  const CeResult res = frame_softmax_ce(logits, labels);

  // Independent loss: mean over batch*frames of -log softmax[label].
  double manual = 0.0;
  for (int n = 0; n < batch; ++n)
    for (int f = 0; f < frames; ++f) {
      double mx = -1e30;
      for (int c = 0; c < classes; ++c) mx = std::max(mx, (double)logits.at(n, c, 0, f));
      double z = 0.0;
      for (int c = 0; c < classes; ++c) z += std::exp((double)logits.at(n, c, 0, f) - mx);
      const int lbl = labels[n * frames + f];
      manual -= ((double)logits.at(n, lbl, 0, f) - mx) - std::log(z);
    }
  manual /= batch * frames;
  CHECK(res.loss == doctest::Approx(manual).epsilon(1e-6));

  const auto loss = [&] { return frame_softmax_ce(logits, labels).loss; };
  for (size_t i = 0; i < logits.size(); ++i)
    CHECK(oracle::close(res.dlogits.v[i], oracle::fd_slot(logits.v[i], 1e-2, loss), 1e-3, 1e-5));

  // Gradient of a mean softmax CE sums to zero per frame.
  for (int n = 0; n < batch; ++n)
    for (int f = 0; f < frames; ++f) {
      double s = 0.0;
      for (int c = 0; c < classes; ++c) s += res.dlogits.at(n, c, 0, f);
      CHECK(std::fabs(s) < 1e-6);
    }
}

TEST_CASE("param store init is keyed by name, not creation order") {
  ParamStore a, b;
  a.create("w1", 4, 3, 3, 3, 42);
  a.create("w2", 2, 4, 1, 1, 42);
  b.create("w2", 2, 4, 1, 1, 42);
  b.create("w1", 4, 3, 3, 3, 42);
  CHECK(a.values_equal(b));

  ParamStore c;
  c.create("w1", 4, 3, 3, 3, 43);
  c.create("w2", 2, 4, 1, 1, 43);
  CHECK_FALSE(a.values_equal(c));

  // Uniform +-sqrt(1/fan_in) bound, fan_in = c*h*w.
  const float bound = std::sqrt(1.0f / (3 * 3 * 3));
  for (float v : a.value("w1").v) {
    CHECK(v >= -bound);
    CHECK(v <= bound);
  }
  CHECK(a.total_params() == 4 * 3 * 3 * 3 + 2 * 4);
  CHECK(a.total_params("w1") == 4 * 3 * 3 * 3);
  CHECK(a.names().size() == 2);
  CHECK(a.names("w2") == std::vector<std::string>{"w2"});
}

TEST_CASE("adadelta matches an independent scalar implementation") {
  ParamStore store;
  store.create("p", 1, 1, 1, 1, 7);
  const double rho = 0.9, eps = 1e-6;
  double x = store.value("p").v[0];
  double acc_g = 0.0, acc_d = 0.0;

  SplitMix64 rng(8);
  for (int step = 0; step < 25; ++step) {
    const double g = rng.next_sym();
    store.grad("p").v[0] = static_cast<float>(g);
    store.adadelta_step(rho, eps);

    acc_g = rho * acc_g + (1.0 - rho) * g * g;
    const double dx = -std::sqrt((acc_d + eps) / (acc_g + eps)) * g;
    acc_d = rho * acc_d + (1.0 - rho) * dx * dx;
    x += dx;
    CHECK(oracle::close(store.value("p").v[0], x, 1e-4, 1e-6));
  }

  // Zero gradient moves nothing.
  ParamStore idle;
  idle.create("q", 2, 2, 1, 1, 9);
  const std::vector<float> before = idle.value("q").v;
  idle.zero_grads();
  idle.adadelta_step();
  CHECK(idle.value("q").v == before);
}

TEST_CASE("param store save and load round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "seqnas_ps_test";
  fs::create_directories(dir);
  const std::string base = (dir / "ckpt").string();

  ParamStore a;
  a.create("backbone.l00.w", 4, 2, 3, 3, 11);
  a.create("head.w", 10, 4, 1, 1, 11);
  a.save(base);

  ParamStore b;
  b.load(base);
  CHECK(b.values_equal(a));
  CHECK(b.total_params() == a.total_params());
  CHECK(b.names() == a.names());

  CHECK_THROWS_AS(b.load((dir / "missing").string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("all_finite flags non-finite values") {
  Tensor4 t = random_tensor(1, 2, 2, 2, 1);
  CHECK(t.all_finite());
  t.v[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
  t.v[3] = std::numeric_limits<float>::infinity();
  CHECK_FALSE(t.all_finite());
}
