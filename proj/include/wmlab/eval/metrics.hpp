#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wmlab/data/watermark.hpp"
#include "wmlab/img/image.hpp"

namespace wmlab {

constexpr double kPsnrCap = 100.0;     // identical images
constexpr double kNccLegit = 0.95;     // retrieval counts as legitimate above this
constexpr double kNullThreshold = 0.05;  // mean intensity below this reads as the null image

inline double psnr(const Image& x, const Image& y) {
  check(x.h == y.h && x.w == y.w && x.c == y.c, "psnr: shape mismatch");
  double se = 0;
  for (size_t i = 0; i < x.v.size(); ++i) {
    double d = static_cast<double>(x.v[i]) - static_cast<double>(y.v[i]);
    se += d * d;
  }
  double mse = se / static_cast<double>(x.v.size());
  if (mse <= 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

inline const std::vector<double>& ssim_window() {
  // 11x11 Gaussian, sigma 1.5, normalized
  static const std::vector<double> w = [] {
    std::vector<double> g(11 * 11);
    double s = 0;
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 11; ++x) {
        double dy = y - 5, dx = x - 5;
        g[y * 11 + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
        s += g[y * 11 + x];
      }
    for (double& v : g) v /= s;
    return g;
  }();
  return w;
}

}  // namespace detail

// Mean SSIM over all fully-interior 11x11 windows, averaged across channels.
// Standard constants K1=0.01, K2=0.03 on unit dynamic range.
inline double ssim(const Image& x, const Image& y) {
  check(x.h == y.h && x.w == y.w && x.c == y.c, "ssim: shape mismatch");
  check(x.h >= 11 && x.w >= 11, "ssim: image smaller than the 11x11 window");
  const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
  const auto& win = detail::ssim_window();
  double total = 0;
  for (int ch = 0; ch < x.c; ++ch) {
    double acc = 0;
    int cnt = 0;
    for (int y0 = 0; y0 + 11 <= x.h; ++y0) {
      for (int x0 = 0; x0 + 11 <= x.w; ++x0) {
        double mx = 0, my = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            double w = win[i * 11 + j];
            mx += w * x.at(y0 + i, x0 + j, ch);
            my += w * y.at(y0 + i, x0 + j, ch);
          }
        double vx = 0, vy = 0, cov = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            double w = win[i * 11 + j];
            double dx = x.at(y0 + i, x0 + j, ch) - mx;
            double dy = y.at(y0 + i, x0 + j, ch) - my;
            vx += w * dx * dx;
            vy += w * dy * dy;
            cov += w * dx * dy;
          }
        acc += ((2 * mx * my + C1) * (2 * cov + C2)) /
               ((mx * mx + my * my + C1) * (vx + vy + C2));
        ++cnt;
      }
    }
    total += acc / cnt;
  }
  return total / x.c;
}

// Cosine similarity between a retrieved watermark and the reference.
// A zero-norm side yields 0 and sets the flag (black retrievals).
inline double ncc(const Image& retrieved, const Image& reference, bool* zero_norm_flag = nullptr) {
  check(retrieved.h == reference.h && retrieved.w == reference.w && retrieved.c == reference.c,
        "ncc: shape mismatch");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < retrieved.v.size(); ++i) {
    double a = retrieved.v[i], b = reference.v[i];
    dot += a * b;
    na += a * a;
    nb += b * b;
  }
  if (zero_norm_flag) *zero_norm_flag = false;
  if (na <= 0 || nb <= 0) {
    if (zero_norm_flag) *zero_norm_flag = true;
    return 0.0;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double ncc(const Image& retrieved, const WatermarkAsset& w, bool* flag = nullptr) {
  return ncc(retrieved, w.image, flag);
}

inline double success_rate(const std::vector<double>& nccs) {
  check(!nccs.empty(), "success_rate: empty retrieval list");
  int ok = 0;
  for (double v : nccs)
    if (v > kNccLegit) ++ok;
  return 100.0 * ok / static_cast<double>(nccs.size());
}

// One row of the evaluation tables. psnr/ssim are absent for conditions
// without cover pairs (the tables print "/" there).
struct EvalRow {
  std::string label;
  std::optional<double> psnr_mean;
  std::optional<double> ssim_mean;
  double ncc_mean = 0;
  double sr = 0;
  int n = 0;
  std::vector<double> ncc_samples;

  static EvalRow from_samples(std::string label, const std::vector<double>& nccs,
                              std::optional<double> psnr = std::nullopt,
                              std::optional<double> ssim = std::nullopt) {
    EvalRow r;
    r.label = std::move(label);
    r.ncc_samples = nccs;
    r.n = static_cast<int>(nccs.size());
    double s = 0;
    for (double v : nccs) s += v;
    r.ncc_mean = r.n ? s / r.n : 0;
    r.sr = success_rate(nccs);
    r.psnr_mean = psnr;
    r.ssim_mean = ssim;
    return r;
  }
};

// One-sided binomial sign test: P(X >= wins) with X ~ Binomial(n, 1/2).
inline double sign_test_pvalue(int wins, int n) {
  check(n > 0 && wins >= 0 && wins <= n, "sign_test_pvalue: bad arguments");
  double p = 0;
  for (int k = wins; k <= n; ++k) {
    double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(logc - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace wmlab
