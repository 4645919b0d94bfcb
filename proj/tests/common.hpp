#pragma once

#include <functional>

#include <catch2/catch_amalgamated.hpp>

#include "wmlab/ad/ops.hpp"
#include "wmlab/core/rng.hpp"
#include "wmlab/img/image.hpp"

namespace wmtest {

using wmlab::Image;
using wmlab::RandomSource;
using wmlab::Tensor;

inline Image random_image(int h, int w, int c, RandomSource& rng, float lo = 0.f, float hi = 1.f) {
  Image img(h, w, c);
  for (auto& v : img.v) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

inline Tensor<double> random_tensor(int n, int c, int h, int w, RandomSource& rng, double lo = -1,
                                    double hi = 1) {
  Tensor<double> t(n, c, h, w);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline double rel_err(double a, double b, double floor = 1e-7) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central finite differences of `eval` w.r.t. x at `n_probe` random
// coordinates, compared against `analytic` (dL/dx) at relative tolerance.
inline void check_grad_fd(Tensor<double>& x, const std::function<double()>& eval,
                          const Tensor<double>& analytic, RandomSource& rng, int n_probe,
                          double tol, double h = 1e-6, double grad_floor = 1e-6) {
  for (int p = 0; p < n_probe; ++p) {
    size_t i = static_cast<size_t>(rng.uniform_int(static_cast<int>(x.size())));
    double keep = x[i];
    x[i] = keep + h;
    double up = eval();
    x[i] = keep - h;
    double dn = eval();
    x[i] = keep;
    double fd = (up - dn) / (2 * h);
    double an = analytic[i];
    if (std::abs(fd) < grad_floor && std::abs(an) < grad_floor) continue;
    INFO("coord " << i << " fd=" << fd << " analytic=" << an);
    CHECK(rel_err(fd, an) <= tol);
  }
}

}  // namespace wmtest
