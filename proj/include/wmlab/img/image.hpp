#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wmlab/core/tensor.hpp"

namespace wmlab {

// Image in the canonical [0,1] range, planar channel-major storage
// (same memory order as a (1,C,H,W) tensor). Channels are 1 or 3.
struct Image {
  int h = 0, w = 0, c = 0;
  std::vector<float> v;

  Image() = default;
  Image(int h_, int w_, int c_, float fill = 0.f)
      : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, fill) {}

  float& at(int y, int x, int ch) { return v[(static_cast<size_t>(ch) * h + y) * w + x]; }
  float at(int y, int x, int ch) const { return v[(static_cast<size_t>(ch) * h + y) * w + x]; }

  size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }
};

inline void validate_image(const Image& img, const char* what = "image") {
  check(img.h >= 8 && img.w >= 8, std::string(what) + ": height/width must be >= 8");
  check(img.c == 1 || img.c == 3, std::string(what) + ": channels must be 1 or 3");
  for (float x : img.v)
    check(std::isfinite(x) && x >= 0.f && x <= 1.f,
          std::string(what) + ": values must be finite and in [0,1]");
}

inline void clamp01(Image& img) {
  for (float& x : img.v) x = std::min(1.f, std::max(0.f, x));
}

inline double mean_intensity(const Image& img) {
  double s = 0;
  for (float x : img.v) s += x;
  return img.v.empty() ? 0.0 : s / static_cast<double>(img.v.size());
}

inline double stddev_intensity(const Image& img) {
  double m = mean_intensity(img);
  double s = 0;
  for (float x : img.v) s += (x - m) * (x - m);
  return img.v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(img.v.size()));
}

inline Image to_gray(const Image& img) {
  if (img.c == 1) return img;
  Image out(img.h, img.w, 1);
  // ITU-R 601 luma
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      out.at(y, x, 0) =
          0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
  return out;
}

inline Image to_rgb(const Image& img) {
  if (img.c == 3) return img;
  Image out(img.h, img.w, 3);
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) out.at(y, x, ch) = img.at(y, x, 0);
  return out;
}

inline Image resize_bilinear(const Image& img, int oh, int ow) {
  if (oh == img.h && ow == img.w) return img;
  Image out(oh, ow, img.c);
  // half-pixel-centered sampling
  const float sy = static_cast<float>(img.h) / oh;
  const float sx = static_cast<float>(img.w) / ow;
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      float fy = (y + 0.5f) * sy - 0.5f;
      int y0 = static_cast<int>(std::floor(fy));
      float ty = fy - y0;
      int y0c = std::clamp(y0, 0, img.h - 1);
      int y1c = std::clamp(y0 + 1, 0, img.h - 1);
      for (int x = 0; x < ow; ++x) {
        float fx = (x + 0.5f) * sx - 0.5f;
        int x0 = static_cast<int>(std::floor(fx));
        float tx = fx - x0;
        int x0c = std::clamp(x0, 0, img.w - 1);
        int x1c = std::clamp(x0 + 1, 0, img.w - 1);
        float a = img.at(y0c, x0c, ch) * (1 - tx) + img.at(y0c, x1c, ch) * tx;
        float b = img.at(y1c, x0c, ch) * (1 - tx) + img.at(y1c, x1c, ch) * tx;
        out.at(y, x, ch) = a * (1 - ty) + b * ty;
      }
    }
  }
  return out;
}

inline Image crop(const Image& img, int y0, int x0, int size) {
  check(y0 >= 0 && x0 >= 0 && y0 + size <= img.h && x0 + size <= img.w, "crop: window out of bounds");
  Image out(size, size, img.c);
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) out.at(y, x, ch) = img.at(y0 + y, x0 + x, ch);
  return out;
}

// Conversions between images and NCHW tensors (planar layouts line up).
template <typename T>
Tensor<T> to_tensor(const Image& img) {
  Tensor<T> t(1, img.c, img.h, img.w);
  for (size_t i = 0; i < img.v.size(); ++i) t[i] = static_cast<T>(img.v[i]);
  return t;
}

template <typename T>
Tensor<T> batch_to_tensor(const std::vector<Image>& imgs) {
  check(!imgs.empty(), "batch_to_tensor: empty batch");
  const Image& f = imgs[0];
  Tensor<T> t(static_cast<int>(imgs.size()), f.c, f.h, f.w);
  for (size_t n = 0; n < imgs.size(); ++n) {
    check(imgs[n].h == f.h && imgs[n].w == f.w && imgs[n].c == f.c,
          "batch_to_tensor: mixed shapes in batch");
    std::copy(imgs[n].v.begin(), imgs[n].v.end(), t.data() + n * f.v.size());
  }
  return t;
}

template <typename T>
Image from_tensor(const Tensor<T>& t, int n = 0, bool clamp = true) {
  Image img(t.h(), t.w(), t.c());
  const T* p = t.data() + static_cast<size_t>(n) * t.c() * t.h() * t.w();
  for (size_t i = 0; i < img.v.size(); ++i) img.v[i] = static_cast<float>(p[i]);
  if (clamp) clamp01(img);
  return img;
}

template <typename T>
std::vector<Image> batch_from_tensor(const Tensor<T>& t, bool clamp = true) {
  std::vector<Image> out;
  out.reserve(t.n());
  for (int n = 0; n < t.n(); ++n) out.push_back(from_tensor(t, n, clamp));
  return out;
}

}  // namespace wmlab
