#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"

using namespace wmlab;
using ad::Var;

namespace {

// FD-check dL/dx for a scalar loss built by `make_loss` over leaf x.
template <typename MakeLoss>
void fd_check(Tensor<double> x0, MakeLoss make_loss, double tol = 1e-5, int probes = 20) {
  RandomSource rng(99);
  auto eval = [&]() {
    auto x = ad::leaf(x0, false);
    return make_loss(x)->val.item();
  };
  auto xv = ad::leaf(x0, true);
  auto loss = make_loss(xv);
  ad::backward(loss);
  REQUIRE(!xv->grad.empty());
  wmtest::check_grad_fd(x0, eval, xv->grad, rng, probes, tol);
}

}  // namespace

TEST_CASE("elementwise op gradients") {
  RandomSource rng(1);
  auto x0 = wmtest::random_tensor(2, 3, 4, 4, rng);
  fd_check(x0, [](Var<double> x) { return ad::mean_all(ad::sigmoid(x)); });
  fd_check(x0, [](Var<double> x) { return ad::mean_all(ad::tanh_val(x)); });
  fd_check(x0, [](Var<double> x) { return ad::mean_all(ad::leaky_relu(x, 0.2)); });
  fd_check(x0, [](Var<double> x) { return ad::mean_all(ad::square(x)); });
  fd_check(x0, [](Var<double> x) { return ad::mean_all(ad::abs_val(x)); });
  fd_check(x0, [](Var<double> x) { return ad::sum_all(ad::affine(x, 2.5, -0.25)); });
  auto pos = wmtest::random_tensor(1, 2, 4, 4, rng, 0.3, 2.0);
  fd_check(pos, [](Var<double> x) { return ad::mean_all(ad::sqrt_val(x)); });
  fd_check(pos, [](Var<double> x) { return ad::mean_all(ad::reciprocal(x)); });
  fd_check(pos, [](Var<double> x) { return ad::mean_all(ad::log_clamped(x, 1e-7)); });
}

TEST_CASE("binary op gradients") {
  RandomSource rng(2);
  auto x0 = wmtest::random_tensor(2, 2, 3, 3, rng);
  auto y = ad::constant(wmtest::random_tensor(2, 2, 3, 3, rng));
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::mul(x, y)); });
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::sub(x, y)); });
  fd_check(x0, [&](Var<double> x) { return ad::mse(x, y); });
  fd_check(x0, [&](Var<double> x) {
    return ad::weighted_sum<double>({ad::mean_all(x), ad::mse(x, y)}, {0.3, 1.7});
  });
}

TEST_CASE("both sides of mul get gradients") {
  RandomSource rng(3);
  auto a0 = wmtest::random_tensor(1, 1, 3, 3, rng);
  auto b0 = wmtest::random_tensor(1, 1, 3, 3, rng);
  auto a = ad::leaf(a0, true);
  auto b = ad::leaf(b0, true);
  auto l = ad::mean_all(ad::mul(a, b));
  ad::backward(l);
  for (size_t i = 0; i < a0.size(); ++i) {
    CHECK(a->grad[i] == Catch::Approx(b0[i] / 9.0));
    CHECK(b->grad[i] == Catch::Approx(a0[i] / 9.0));
  }
}

TEST_CASE("structural op gradients") {
  RandomSource rng(4);
  auto x0 = wmtest::random_tensor(2, 2, 4, 4, rng);
  auto other = ad::constant(wmtest::random_tensor(2, 3, 4, 4, rng));
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::square(ad::concat_channels(x, other))); });
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::square(ad::upsample_nearest2(x))); });
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::square(ad::avgpool2(x))); });
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::square(ad::slice_channels(x, 1, 1))); });
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::square(ad::slice_batch(x, 1, 1))); });
  auto bb = ad::constant(wmtest::random_tensor(3, 2, 4, 4, rng));
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::square(ad::concat_batch(x, bb))); });
}

TEST_CASE("reduce and broadcast gradients") {
  RandomSource rng(5);
  auto x0 = wmtest::random_tensor(2, 2, 3, 3, rng, 0.1, 1.0);
  auto s0 = wmtest::random_tensor(2, 2, 1, 1, rng, 0.5, 1.5);
  auto s = ad::constant(s0);
  fd_check(x0, [&](Var<double> x) { return ad::mean_all(ad::mul_per_plane(x, s)); });
  // scale side
  {
    auto x = ad::constant(x0);
    auto eval_s = [&]() {
      auto sv = ad::leaf(s0, false);
      return ad::mean_all(ad::mul_per_plane(x, sv))->val.item();
    };
    auto sv = ad::leaf(s0, true);
    auto l = ad::mean_all(ad::mul_per_plane(x, sv));
    ad::backward(l);
    RandomSource prng(77);
    wmtest::check_grad_fd(s0, eval_s, sv->grad, prng, 4, 1e-5);
  }
  // max routes to argmax only; keep a clear unique max to stay off the kink
  auto m0 = wmtest::random_tensor(1, 2, 3, 3, rng, 0.0, 0.5);
  m0.at(0, 0, 1, 2) = 2.0;
  m0.at(0, 1, 0, 0) = 3.0;
  fd_check(m0, [&](Var<double> x) { return ad::mean_all(ad::max_per_plane(x)); }, 1e-6, 12);
}

TEST_CASE("conv2d gradients w.r.t. input, weight, bias") {
  RandomSource rng(6);
  for (int stride : {1, 2}) {
    auto x0 = wmtest::random_tensor(2, 3, 6, 6, rng);
    auto w0 = wmtest::random_tensor(4, 3, 3, 3, rng, -0.5, 0.5);
    auto b0 = wmtest::random_tensor(1, 4, 1, 1, rng, -0.1, 0.1);

    auto run = [&](bool xg, bool wg, bool bg) {
      auto x = ad::leaf(x0, xg);
      auto w = ad::leaf(w0, wg);
      auto b = ad::leaf(b0, bg);
      auto l = ad::mean_all(ad::square(ad::conv2d(x, w, b, stride, 1)));
      ad::backward(l);
      return std::tuple{x, w, b, l->val.item()};
    };

    {
      auto [x, w, b, v] = run(true, true, true);
      RandomSource prng(10 + stride);
      auto eval_x = [&]() {
        auto xx = ad::leaf(x0, false);
        return ad::mean_all(
                   ad::square(ad::conv2d(xx, ad::constant(w0), ad::constant(b0), stride, 1)))
            ->val.item();
      };
      wmtest::check_grad_fd(x0, eval_x, x->grad, prng, 12, 1e-5);
      auto eval_w = [&]() {
        auto ww = ad::leaf(w0, false);
        return ad::mean_all(
                   ad::square(ad::conv2d(ad::constant(x0), ww, ad::constant(b0), stride, 1)))
            ->val.item();
      };
      wmtest::check_grad_fd(w0, eval_w, w->grad, prng, 12, 1e-5);
      auto eval_b = [&]() {
        auto bb = ad::leaf(b0, false);
        return ad::mean_all(
                   ad::square(ad::conv2d(ad::constant(x0), ad::constant(w0), bb, stride, 1)))
            ->val.item();
      };
      wmtest::check_grad_fd(b0, eval_b, b->grad, prng, 4, 1e-5);
    }
  }
}

TEST_CASE("conv2d matches a naive direct convolution") {
  RandomSource rng(7);
  auto x0 = wmtest::random_tensor(1, 2, 5, 5, rng);
  auto w0 = wmtest::random_tensor(3, 2, 3, 3, rng);
  auto b0 = wmtest::random_tensor(1, 3, 1, 1, rng);
  auto out = ad::conv2d(ad::constant(x0), ad::constant(w0), ad::constant(b0), 1, 1)->val;
  for (int co = 0; co < 3; ++co)
    for (int oy = 0; oy < 5; ++oy)
      for (int ox = 0; ox < 5; ++ox) {
        double acc = b0[co];
        for (int ci = 0; ci < 2; ++ci)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              int iy = oy - 1 + i, ix = ox - 1 + j;
              if (iy >= 0 && iy < 5 && ix >= 0 && ix < 5)
                acc += x0.at(0, ci, iy, ix) * w0.at(co, ci, i, j);
            }
        CHECK(out.at(0, co, oy, ox) == Catch::Approx(acc).margin(1e-12));
      }
}

TEST_CASE("dft2d forward matches direct DFT and grads pass FD") {
  RandomSource rng(8);
  auto x0 = wmtest::random_tensor(1, 1, 4, 4, rng);
  auto y = ad::dft2d(ad::constant(x0))->val;
  const int H = 4, W = 4;
  for (int u = 0; u < H; ++u)
    for (int v = 0; v < W; ++v) {
      std::complex<double> acc = 0;
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j)
          acc += x0.at(0, 0, i, j) *
                 std::exp(std::complex<double>(0, -2.0 * M_PI * (double(u * i) / H + double(v * j) / W)));
      acc /= std::sqrt(double(H) * W);
      CHECK(y.at(0, 0, u, v) == Catch::Approx(acc.real()).margin(1e-12));
      CHECK(y.at(0, 1, u, v) == Catch::Approx(acc.imag()).margin(1e-12));
    }

  fd_check(x0, [](Var<double> x) { return ad::mean_all(ad::square(ad::dft2d(x))); });
}

TEST_CASE("dft2d preserves energy (Parseval)") {
  RandomSource rng(9);
  auto x0 = wmtest::random_tensor(2, 1, 8, 8, rng);
  auto y = ad::dft2d(ad::constant(x0))->val;
  double px = 0, py = 0;
  for (size_t i = 0; i < x0.size(); ++i) px += x0[i] * x0[i];
  for (size_t i = 0; i < y.size(); ++i) py += y[i] * y[i];
  CHECK(py == Catch::Approx(px).epsilon(1e-10));
}

TEST_CASE("stop_gradient blocks flow") {
  RandomSource rng(10);
  auto x0 = wmtest::random_tensor(1, 1, 2, 2, rng);
  auto x = ad::leaf(x0, true);
  auto l = ad::mean_all(ad::mul(ad::stop_gradient(x), x));
  ad::backward(l);
  for (size_t i = 0; i < x0.size(); ++i)
    CHECK(x->grad[i] == Catch::Approx(x0[i] / 4.0));  // only the live branch contributes
}

TEST_CASE("grad accumulates across reuse") {
  auto x = ad::leaf(Tensor<double>::scalar(3.0), true);
  auto l = ad::add(ad::mul(x, x), x);  // x^2 + x -> dL/dx = 2x + 1 = 7
  ad::backward(l);
  CHECK(x->grad[0] == Catch::Approx(7.0));
}
