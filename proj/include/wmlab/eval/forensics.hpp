#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "wmlab/img/image.hpp"

namespace wmlab {

using MatC = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kLogPowerFloor = 1e-12;

namespace detail {

// Orthonormal DFT matrix, cached per size. Small images make the O(N^3)
// matrix transform perfectly adequate and bit-reproducible.
inline const MatC& dft_matrix(int n) {
  static std::map<int, MatC> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  MatC f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double ang = -2.0 * M_PI * j * k / n;
      f(j, k) = std::complex<double>(std::cos(ang) * scale, std::sin(ang) * scale);
    }
  return cache.emplace(n, std::move(f)).first->second;
}

inline MatD plane_to_mat(const Image& img, int ch) {
  MatD m(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) m(y, x) = img.at(y, x, ch);
  return m;
}

}  // namespace detail

// Orthonormal 2-D DFT of one channel plane: sum |Y|^2 == sum |x|^2.
inline MatC dft2(const MatD& x) {
  const MatC& fh = detail::dft_matrix(static_cast<int>(x.rows()));
  const MatC& fw = detail::dft_matrix(static_cast<int>(x.cols()));
  return fh * x.cast<std::complex<double>>() * fw;
}

inline MatD idft2_real(const MatC& y) {
  const MatC& fh = detail::dft_matrix(static_cast<int>(y.rows()));
  const MatC& fw = detail::dft_matrix(static_cast<int>(y.cols()));
  MatC x = fh.conjugate() * y * fw.conjugate();
  return x.real();
}

// Signed centered frequency for index i of n (fftshift convention).
inline int centered_freq(int i, int n) { return i < n / 2 ? i : i - n; }

// Integer radial bin of DFT cell (u,v); matches the azimuthal binning.
inline int radial_bin(int u, int v, int h, int w) {
  double fu = centered_freq(u, h), fv = centered_freq(v, w);
  return static_cast<int>(std::lround(std::hypot(fu, fv)));
}

inline int max_radial_bin(int h, int w) { return radial_bin(h / 2, w / 2, h, w); }

// 1-D azimuthally averaged log-power spectrum.
// Bins have unit radius width and extend into the spectrum corners, so the
// frequency axis reaches ~sqrt(2)*N/2 like the usual presentations.
struct SpectrumProfile {
  std::vector<double> amplitudes;  // mean log10 power per radial bin
  std::vector<double> bin_edges;   // size amplitudes.size()+1

  int radial_bins() const { return static_cast<int>(amplitudes.size()); }
};

inline SpectrumProfile azimuthal_integral(const Image& img) {
  Image gray = to_gray(img);
  MatC y = dft2(detail::plane_to_mat(gray, 0));
  int h = gray.h, w = gray.w;
  int bins = max_radial_bin(h, w) + 1;
  std::vector<double> sum(bins, 0.0);
  std::vector<int> cnt(bins, 0);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      int b = radial_bin(u, v, h, w);
      double p = std::norm(y(u, v));
      sum[b] += std::log10(std::max(p, kLogPowerFloor));
      cnt[b] += 1;
    }
  SpectrumProfile prof;
  prof.amplitudes.resize(bins);
  for (int b = 0; b < bins; ++b)
    prof.amplitudes[b] = cnt[b] ? sum[b] / cnt[b] : std::log10(kLogPowerFloor);
  prof.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) prof.bin_edges[b] = std::max(0.0, b - 0.5);
  return prof;
}

inline SpectrumProfile average_profiles(const std::vector<SpectrumProfile>& profs) {
  check(!profs.empty(), "average_profiles: empty list");
  SpectrumProfile out = profs[0];
  for (size_t i = 1; i < profs.size(); ++i) {
    check(profs[i].amplitudes.size() == out.amplitudes.size(), "average_profiles: bin mismatch");
    for (size_t b = 0; b < out.amplitudes.size(); ++b) out.amplitudes[b] += profs[i].amplitudes[b];
  }
  for (double& a : out.amplitudes) a /= static_cast<double>(profs.size());
  return out;
}

// Mean amplitude over the top `fraction` of radial bins (the high band).
inline double high_band_mean(const SpectrumProfile& p, double fraction) {
  int bins = p.radial_bins();
  int start = static_cast<int>(std::ceil(bins * (1.0 - fraction)));
  start = std::min(std::max(start, 0), bins - 1);
  double s = 0;
  for (int b = start; b < bins; ++b) s += p.amplitudes[b];
  return s / (bins - start);
}

// Ideal ring low-pass: zero every DFT cell whose radial bin exceeds the
// cutoff, per channel, then clamp back to range.
inline Image low_pass_filter(const Image& img, int cutoff_radius) {
  check(cutoff_radius >= 0 && cutoff_radius <= max_radial_bin(img.h, img.w),
        "low_pass_filter: cutoff outside 0..max radius");
  Image out(img.h, img.w, img.c);
  for (int ch = 0; ch < img.c; ++ch) {
    MatC y = dft2(detail::plane_to_mat(img, ch));
    for (int u = 0; u < img.h; ++u)
      for (int v = 0; v < img.w; ++v)
        if (radial_bin(u, v, img.h, img.w) > cutoff_radius) y(u, v) = 0.0;
    MatD x = idft2_real(y);
    for (int yy = 0; yy < img.h; ++yy)
      for (int xx = 0; xx < img.w; ++xx) out.at(yy, xx, ch) = static_cast<float>(x(yy, xx));
  }
  clamp01(out);
  return out;
}

inline Image residue_map(const Image& cover, const Image& container, float gain = 10.f) {
  check(cover.h == container.h && cover.w == container.w && cover.c == container.c,
        "residue_map: shape mismatch");
  Image out(cover.h, cover.w, cover.c);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = std::min(1.f, gain * std::fabs(container.v[i] - cover.v[i]));
  return out;
}

}  // namespace wmlab
