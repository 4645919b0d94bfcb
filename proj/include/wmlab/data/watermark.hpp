#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "wmlab/img/image.hpp"
#include "wmlab/img/imageio.hpp"

namespace wmlab {

// A secret image to embed plus the all-black null contract.
struct WatermarkAsset {
  std::string name;
  Image image;
  bool is_null = false;
};

namespace detail {

struct Rgb {
  float r, g, b;
};

inline float smoothstep(float e0, float e1, float x) {
  float t = std::clamp((x - e0) / (e1 - e0), 0.f, 1.f);
  return t * t * (3.f - 2.f * t);
}

inline Rgb mix(Rgb a, Rgb b, float t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

// The bundled marks are procedural so the suite needs no binary assets.
// Each painter maps normalized coords (u,v) in [0,1]^2 to a color.
inline Rgb paint_flower(float u, float v) {
  float dx = u - 0.5f, dy = v - 0.5f;
  float r = std::hypot(dx, dy);
  float th = std::atan2(dy, dx);
  Rgb bg = {0.10f + 0.25f * v, 0.42f + 0.18f * u, 0.16f + 0.08f * std::sin(9.f * u)};
  float petal_r = 0.17f + 0.17f * std::cos(6.f * th);
  float petal = smoothstep(petal_r + 0.015f, petal_r - 0.015f, r);
  Rgb col = mix(bg, {0.93f, 0.42f, 0.72f}, petal);
  float core = smoothstep(0.09f, 0.07f, r);
  col = mix(col, {0.98f, 0.84f, 0.20f}, core);
  float stem = (v > 0.62f && std::fabs(dx + 0.12f * std::sin(6.f * v)) < 0.025f) ? 1.f : 0.f;
  return mix(col, {0.15f, 0.55f, 0.22f}, stem);
}

inline Rgb paint_copyright(float u, float v) {
  float dx = u - 0.5f, dy = v - 0.5f;
  float r = std::hypot(dx, dy);
  float th = std::atan2(dy, dx);
  Rgb col = {0.93f, 0.93f, 0.90f};
  float ring = smoothstep(0.285f, 0.30f, r) * smoothstep(0.385f, 0.37f, r);
  col = mix(col, {0.08f, 0.08f, 0.10f}, ring);
  bool c_gap = std::fabs(th) < 0.75f;  // opening of the C on the right
  float cglyph = smoothstep(0.10f, 0.115f, r) * smoothstep(0.235f, 0.22f, r) * (c_gap ? 0.f : 1.f);
  col = mix(col, {0.08f, 0.08f, 0.10f}, cglyph);
  float bar = (v > 0.86f && v < 0.92f && u > 0.2f && u < 0.8f) ? 1.f : 0.f;
  return mix(col, {0.55f, 0.1f, 0.1f}, bar);
}

inline Rgb paint_lena(float u, float v) {
  Rgb col = {0.30f + 0.12f * u, 0.20f + 0.06f * v, 0.28f};
  auto ellipse = [&](float cx, float cy, float rx, float ry) {
    float d = std::hypot((u - cx) / rx, (v - cy) / ry);
    return smoothstep(1.03f, 0.97f, d);
  };
  col = mix(col, {0.52f, 0.34f, 0.30f}, ellipse(0.5f, 0.88f, 0.42f, 0.30f));  // shoulders
  col = mix(col, {0.86f, 0.64f, 0.50f}, ellipse(0.5f, 0.46f, 0.21f, 0.28f));  // face
  float hat = ellipse(0.5f, 0.16f, 0.34f, 0.16f);
  col = mix(col, {0.45f, 0.22f, 0.55f}, hat);
  col = mix(col, {0.12f, 0.08f, 0.08f}, ellipse(0.42f, 0.42f, 0.035f, 0.025f));  // eyes
  col = mix(col, {0.12f, 0.08f, 0.08f}, ellipse(0.58f, 0.42f, 0.035f, 0.025f));
  col = mix(col, {0.70f, 0.30f, 0.32f}, ellipse(0.5f, 0.60f, 0.05f, 0.022f));  // mouth
  float band = 0.04f * std::sin(40.f * u) * hat;
  col.r += band;
  return col;
}

inline Rgb paint_pepper(float u, float v) {
  float dx = u - 0.5f, dy = v - 0.56f;
  Rgb col = {0.08f + 0.10f * v, 0.14f + 0.10f * (1 - v), 0.07f};
  float body = std::pow(std::fabs(dx / 0.30f), 2.6f) + std::pow(std::fabs(dy / 0.33f), 2.6f);
  float inside = smoothstep(1.05f, 0.95f, body);
  Rgb red = {0.82f - 0.25f * (dy + 0.33f), 0.10f + 0.05f * (1 - v), 0.08f};
  col = mix(col, red, inside);
  float lobe = 0.04f * std::cos(10.f * std::atan2(dy, dx + 1e-6f)) * inside;
  col.r += lobe;
  float stem = (v < 0.26f && std::fabs(dx - 0.05f * std::sin(12.f * v)) < 0.035f) ? 1.f : 0.f;
  col = mix(col, {0.20f, 0.52f, 0.18f}, stem);
  float gleam = smoothstep(1.f, 0.f, std::hypot((u - 0.40f) / 0.07f, (v - 0.40f) / 0.12f));
  col = mix(col, {1.f, 0.85f, 0.8f}, 0.55f * gleam * inside);
  return col;
}

inline Image paint_asset(const std::string& name, int size) {
  Image img(size, size, 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      float u = (x + 0.5f) / size, v = (y + 0.5f) / size;
      Rgb c;
      if (name == "flower") c = paint_flower(u, v);
      else if (name == "copyright") c = paint_copyright(u, v);
      else if (name == "lena") c = paint_lena(u, v);
      else c = paint_pepper(u, v);
      img.at(y, x, 0) = std::clamp(c.r, 0.f, 1.f);
      img.at(y, x, 1) = std::clamp(c.g, 0.f, 1.f);
      img.at(y, x, 2) = std::clamp(c.b, 0.f, 1.f);
    }
  }
  return img;
}

}  // namespace detail

inline const std::vector<std::string>& bundled_watermarks() {
  static const std::vector<std::string> names = {"flower", "copyright", "lena", "pepper"};
  return names;
}

inline WatermarkAsset load_watermark(const std::string& name_or_path, int target_size) {
  check(target_size >= 8, "load_watermark: target size must be >= 8");
  if (name_or_path == "null") {
    WatermarkAsset a;
    a.name = "null";
    a.image = Image(target_size, target_size, 3, 0.f);
    a.is_null = true;
    return a;
  }
  for (const auto& n : bundled_watermarks()) {
    if (n == name_or_path) {
      WatermarkAsset a;
      a.name = n;
      a.image = detail::paint_asset(n, target_size);
      return a;
    }
  }
  if (std::filesystem::exists(name_or_path)) {
    WatermarkAsset a;
    a.name = std::filesystem::path(name_or_path).stem().string();
    a.image = resize_bilinear(to_rgb(read_image(name_or_path)), target_size, target_size);
    clamp01(a.image);
    check(stddev_intensity(a.image) > 0.0, "load_watermark: watermark image is constant");
    return a;
  }
  std::string known = "null";
  for (const auto& n : bundled_watermarks()) known += ", " + n;
  throw std::runtime_error("unknown watermark '" + name_or_path + "' (bundled assets: " + known +
                           "; otherwise pass a readable image path)");
}

}  // namespace wmlab
