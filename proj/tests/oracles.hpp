#pragma once

// Brute-force double-precision reference implementations. These stay
// deliberately independent of the library code paths they check: plain
// loops, no shared helpers beyond pixel access.

#include <complex>
#include <vector>

#include "wmlab/img/image.hpp"

namespace wmtest::oracle {

using wmlab::Image;

inline double psnr(const Image& x, const Image& y) {
  double se = 0;
  for (size_t i = 0; i < x.v.size(); ++i) {
    double d = double(x.v[i]) - double(y.v[i]);
    se += d * d;
  }
  double mse = se / double(x.v.size());
  if (mse <= 0) return 100.0;
  double v = 10.0 * std::log10(1.0 / mse);
  return v > 100.0 ? 100.0 : v;
}

inline double ssim(const Image& x, const Image& y) {
  const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
  // 11x11 gaussian sigma 1.5
  double win[11][11], wsum = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      double dy = i - 5, dx = j - 5;
      win[i][j] = std::exp(-(dx * dx + dy * dy) / 4.5);
      wsum += win[i][j];
    }
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) win[i][j] /= wsum;

  double chan_total = 0;
  for (int ch = 0; ch < x.c; ++ch) {
    double acc = 0;
    int cnt = 0;
    for (int y0 = 0; y0 + 11 <= x.h; ++y0)
      for (int x0 = 0; x0 + 11 <= x.w; ++x0) {
        double mx = 0, my = 0, vx = 0, vy = 0, cov = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            mx += win[i][j] * x.at(y0 + i, x0 + j, ch);
            my += win[i][j] * y.at(y0 + i, x0 + j, ch);
          }
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            double dx = x.at(y0 + i, x0 + j, ch) - mx;
            double dy = y.at(y0 + i, x0 + j, ch) - my;
            vx += win[i][j] * dx * dx;
            vy += win[i][j] * dy * dy;
            cov += win[i][j] * dx * dy;
          }
        acc += ((2 * mx * my + C1) * (2 * cov + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
        ++cnt;
      }
    chan_total += acc / cnt;
  }
  return chan_total / x.c;
}

inline double ncc(const Image& a, const Image& b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.v.size(); ++i) {
    dot += double(a.v[i]) * b.v[i];
    na += double(a.v[i]) * a.v[i];
    nb += double(b.v[i]) * b.v[i];
  }
  if (na <= 0 || nb <= 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Dense orthonormal 2-D DFT by direct summation.
inline std::vector<std::complex<double>> dft2_dense(const Image& gray) {
  const int H = gray.h, W = gray.w;
  std::vector<std::complex<double>> out(size_t(H) * W);
  for (int u = 0; u < H; ++u)
    for (int v = 0; v < W; ++v) {
      std::complex<double> acc = 0;
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          double ang = -2.0 * M_PI * (double(u) * i / H + double(v) * j / W);
          acc += double(gray.at(i, j, 0)) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      out[size_t(u) * W + v] = acc / std::sqrt(double(H) * W);
    }
  return out;
}

// Azimuthally averaged log power, corner bins included, round-to-nearest
// radius binning, floor 1e-12.
inline std::vector<double> azimuthal(const Image& rgb) {
  Image gray(rgb.h, rgb.w, 1);
  if (rgb.c == 1) gray = rgb;
  else
    for (int y = 0; y < rgb.h; ++y)
      for (int x = 0; x < rgb.w; ++x)
        gray.at(y, x, 0) =
            0.299f * rgb.at(y, x, 0) + 0.587f * rgb.at(y, x, 1) + 0.114f * rgb.at(y, x, 2);
  auto F = dft2_dense(gray);
  const int H = gray.h, W = gray.w;
  int rmax = (int)std::lround(std::hypot(H / 2.0, W / 2.0));
  std::vector<double> sum(rmax + 1, 0.0);
  std::vector<int> cnt(rmax + 1, 0);
  for (int u = 0; u < H; ++u)
    for (int v = 0; v < W; ++v) {
      int fu = u < H / 2 ? u : u - H;
      int fv = v < W / 2 ? v : v - W;
      int b = (int)std::lround(std::hypot(double(fu), double(fv)));
      double p = std::norm(F[size_t(u) * W + v]);
      sum[b] += std::log10(p < 1e-12 ? 1e-12 : p);
      cnt[b] += 1;
    }
  std::vector<double> out(rmax + 1);
  for (int b = 0; b <= rmax; ++b) out[b] = cnt[b] ? sum[b] / cnt[b] : std::log10(1e-12);
  return out;
}

// Focal frequency loss with alpha=1 and per-(image,channel) peak
// normalization, by direct summation.
inline double focal_frequency(const Image& x, const Image& y) {
  double total = 0;
  size_t count = 0;
  for (int ch = 0; ch < x.c; ++ch) {
    Image xp(x.h, x.w, 1), yp(y.h, y.w, 1);
    for (int i = 0; i < x.h; ++i)
      for (int j = 0; j < x.w; ++j) {
        xp.at(i, j, 0) = x.at(i, j, ch);
        yp.at(i, j, 0) = y.at(i, j, ch);
      }
    auto fx = dft2_dense(xp);
    auto fy = dft2_dense(yp);
    std::vector<double> mag2(fx.size()), mag(fx.size());
    double peak = 0;
    for (size_t i = 0; i < fx.size(); ++i) {
      auto d = fx[i] - fy[i];
      mag2[i] = std::norm(d);
      mag[i] = std::sqrt(mag2[i] + 1e-24);
      peak = std::max(peak, mag[i]);
    }
    peak += 1e-24;
    for (size_t i = 0; i < fx.size(); ++i) {
      total += (mag[i] / peak) * mag2[i];
      ++count;
    }
  }
  return total / double(count);
}

}  // namespace wmtest::oracle
