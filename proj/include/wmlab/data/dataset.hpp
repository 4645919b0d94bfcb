#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wmlab/core/rng.hpp"
#include "wmlab/img/image.hpp"
#include "wmlab/img/imageio.hpp"

namespace wmlab {

enum class Task { synthetic, derain, eightbit };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::synthetic: return "synthetic";
    case Task::derain: return "derain";
    case Task::eightbit: return "eightbit";
  }
  return "?";
}

inline Task parse_task(const std::string& s) {
  if (s == "synthetic") return Task::synthetic;
  if (s == "derain") return Task::derain;
  if (s == "eightbit") return Task::eightbit;
  throw std::runtime_error("unknown task '" + s + "' (expected synthetic|derain|eightbit)");
}

// ---------------------------------------------------------------------------
// primitive ops

inline Image random_crop(const Image& img, int size, RandomSource& rng) {
  check(size > 0 && size <= std::min(img.h, img.w),
        "random_crop: size " + std::to_string(size) + " exceeds image " + std::to_string(img.h) +
            "x" + std::to_string(img.w));
  int y0 = img.h == size ? 0 : rng.uniform_int(img.h - size + 1);
  int x0 = img.w == size ? 0 : rng.uniform_int(img.w - size + 1);
  return crop(img, y0, x0, size);
}

// Posterize + block-average pixelation; stands in for the 8-bit stylization task.
inline Image make_eightbit_target(const Image& input, int palette_levels, int block) {
  check(palette_levels >= 1, "make_eightbit_target: need at least one palette level");
  check(block >= 1 && input.h % block == 0 && input.w % block == 0,
        "make_eightbit_target: block " + std::to_string(block) + " must divide " +
            std::to_string(input.h) + "x" + std::to_string(input.w));
  Image out(input.h, input.w, input.c);
  const float L = static_cast<float>(palette_levels);
  for (int ch = 0; ch < input.c; ++ch) {
    for (int by = 0; by < input.h; by += block) {
      for (int bx = 0; bx < input.w; bx += block) {
        double s = 0;
        for (int y = 0; y < block; ++y)
          for (int x = 0; x < block; ++x) s += input.at(by + y, bx + x, ch);
        float mean = static_cast<float>(s / (block * block));
        int idx = std::clamp(static_cast<int>(std::floor(mean * L)), 0, palette_levels - 1);
        float q = (idx + 0.5f) / L;  // mid-rise centers are quantization fixpoints
        for (int y = 0; y < block; ++y)
          for (int x = 0; x < block; ++x) out.at(by + y, bx + x, ch) = q;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// synthetic image generation

namespace detail {

inline void draw_soft_ellipse(Image& img, float cy, float cx, float ry, float rx, float col[3]) {
  int y0 = std::max(0, static_cast<int>(cy - ry - 2)), y1 = std::min(img.h - 1, static_cast<int>(cy + ry + 2));
  int x0 = std::max(0, static_cast<int>(cx - rx - 2)), x1 = std::min(img.w - 1, static_cast<int>(cx + rx + 2));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      float d = std::hypot((y - cy) / ry, (x - cx) / rx);
      float a = std::clamp((1.05f - d) / 0.10f, 0.f, 1.f);
      if (a <= 0) continue;
      for (int ch = 0; ch < img.c; ++ch) {
        float& p = img.at(y, x, ch);
        p = p * (1 - a) + col[ch % 3] * a;
      }
    }
  }
}

inline void draw_soft_rect(Image& img, int cy, int cx, int hh, int hw, float col[3]) {
  int y0 = std::max(0, cy - hh), y1 = std::min(img.h - 1, cy + hh);
  int x0 = std::max(0, cx - hw), x1 = std::min(img.w - 1, cx + hw);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      for (int ch = 0; ch < img.c; ++ch) img.at(y, x, ch) = col[ch % 3];
}

}  // namespace detail

// Procedural "natural-ish" image: smooth chromatic background plus a few
// soft-edged shapes and faint texture. Deterministic in the stream passed in.
inline Image synthetic_clean_image(int size, RandomSource& rng) {
  Image img(size, size, 3);
  for (int ch = 0; ch < 3; ++ch) {
    double base = rng.uniform(0.25, 0.65);
    double fy = rng.uniform(0.5, 2.0), fx = rng.uniform(0.5, 2.0);
    double ph = rng.uniform(0.0, 2.0 * M_PI);
    double amp = rng.uniform(0.08, 0.2);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        img.at(y, x, ch) = static_cast<float>(
            base + amp * std::sin(2.0 * M_PI * (fy * y + fx * x) / size + ph));
  }
  int shapes = 3 + rng.uniform_int(4);
  for (int s = 0; s < shapes; ++s) {
    float col[3] = {static_cast<float>(rng.uniform(0.1, 0.9)),
                    static_cast<float>(rng.uniform(0.1, 0.9)),
                    static_cast<float>(rng.uniform(0.1, 0.9))};
    float cy = static_cast<float>(rng.uniform(0.1, 0.9)) * size;
    float cx = static_cast<float>(rng.uniform(0.1, 0.9)) * size;
    if (rng.uniform() < 0.6) {
      float ry = static_cast<float>(rng.uniform(0.06, 0.25)) * size;
      float rx = static_cast<float>(rng.uniform(0.06, 0.25)) * size;
      detail::draw_soft_ellipse(img, cy, cx, ry, rx, col);
    } else {
      int hh = static_cast<int>(rng.uniform(0.05, 0.2) * size);
      int hw = static_cast<int>(rng.uniform(0.05, 0.2) * size);
      detail::draw_soft_rect(img, static_cast<int>(cy), static_cast<int>(cx), hh, hw, col);
    }
  }
  for (float& p : img.v)
    p = std::clamp(p + static_cast<float>(rng.uniform(-0.015, 0.015)), 0.02f, 0.98f);
  return img;
}

// Structured additive degradation (rain-like streaks), the synthetic task input.
inline Image add_streak_noise(const Image& clean, RandomSource& rng) {
  Image out = clean;
  int n = 25 + rng.uniform_int(20);
  double angle0 = rng.uniform(75.0, 105.0) * M_PI / 180.0;
  for (int i = 0; i < n; ++i) {
    double th = angle0 + rng.uniform(-0.06, 0.06);
    double len = rng.uniform(0.10, 0.22) * clean.h;
    double y = rng.uniform(0, clean.h), x = rng.uniform(0, clean.w);
    float gain = static_cast<float>(rng.uniform(0.18, 0.38));
    double dy = std::sin(th), dx = std::cos(th);
    for (double t = 0; t < len; t += 0.5) {
      int yy = static_cast<int>(y + t * dy), xx = static_cast<int>(x + t * dx);
      if (yy < 0 || yy >= clean.h || xx < 0 || xx >= clean.w) break;
      float fade = static_cast<float>(1.0 - 0.5 * t / len);
      for (int ch = 0; ch < clean.c; ++ch) {
        float& p = out.at(yy, xx, ch);
        p = std::min(1.f, p + gain * fade);
      }
    }
  }
  for (float& p : out.v) p = std::clamp(p + static_cast<float>(rng.uniform(-0.01, 0.01)), 0.f, 1.f);
  return out;
}

// ---------------------------------------------------------------------------
// datasets

// Aligned (input A, target B) pairs with a train/test split. Images are kept
// at native size; crops are taken lazily per access.
struct PairedDataset {
  Task task = Task::synthetic;
  int crop_size = 0;
  std::vector<std::pair<Image, Image>> pairs;
  std::vector<int> train_idx, test_idx;

  int train_size() const { return static_cast<int>(train_idx.size()); }
  int test_size() const { return static_cast<int>(test_idx.size()); }

  // Aligned random crop of pair `idx` (absolute index into `pairs`).
  std::pair<Image, Image> sample(int idx, RandomSource& rng) const {
    const auto& [a, b] = pairs.at(idx);
    check(a.h == b.h && a.w == b.w, "PairedDataset: pair not aligned");
    if (a.h == crop_size && a.w == crop_size) return {a, b};
    int y0 = rng.uniform_int(a.h - crop_size + 1);
    int x0 = rng.uniform_int(a.w - crop_size + 1);
    return {crop(a, y0, x0, crop_size), crop(b, y0, x0, crop_size)};
  }

  // Deterministic center crop, for evaluation.
  std::pair<Image, Image> fixed(int idx) const {
    const auto& [a, b] = pairs.at(idx);
    int y0 = (a.h - crop_size) / 2, x0 = (a.w - crop_size) / 2;
    return {crop(a, y0, x0, crop_size), crop(b, y0, x0, crop_size)};
  }
};

struct DatasetOptions {
  int n_train = 100;   // synthetic only
  int n_test = 100;    // synthetic only
  double test_fraction = 0.2;  // disk tasks without an explicit split
  uint64_t seed = 7;
  int eightbit_levels = 6;
  int eightbit_block = 8;
};

namespace detail {

inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) return files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline void split_indices(int n, double test_fraction, uint64_t seed, std::vector<int>& train,
                          std::vector<int>& test) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  RandomSource rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
  int n_test = static_cast<int>(n * test_fraction);
  test.assign(order.begin(), order.begin() + n_test);
  train.assign(order.begin() + n_test, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

}  // namespace detail

inline std::vector<std::filesystem::path> list_image_files(const std::string& dir) {
  return detail::list_images(dir);
}

inline PairedDataset load_paired_dataset(const std::string& root, Task task, int crop_size,
                                         const DatasetOptions& opts = {}) {
  PairedDataset ds;
  ds.task = task;
  ds.crop_size = crop_size;

  if (task == Task::synthetic) {
    RandomSource base(opts.seed);
    int total = opts.n_train + opts.n_test;
    for (int i = 0; i < total; ++i) {
      RandomSource r = base.child(1000 + i);
      Image b = synthetic_clean_image(crop_size, r);
      Image a = add_streak_noise(b, r);
      ds.pairs.emplace_back(std::move(a), std::move(b));
    }
    for (int i = 0; i < opts.n_train; ++i) ds.train_idx.push_back(i);
    for (int i = opts.n_train; i < total; ++i) ds.test_idx.push_back(i);
    return ds;
  }

  namespace fs = std::filesystem;
  if (task == Task::derain) {
    auto a_files = detail::list_images(fs::path(root) / "A");
    auto b_dir = fs::path(root) / "B";
    check(!a_files.empty(), "load_paired_dataset: no images under " + root + "/A");
    for (const auto& ap : a_files) {
      fs::path bp = b_dir / ap.filename();
      check(fs::exists(bp), "load_paired_dataset: missing target for " + ap.filename().string() +
                                " (expected " + bp.string() + ")");
      Image a = to_rgb(read_image(ap.string()));
      Image b = to_rgb(read_image(bp.string()));
      check(a.h == b.h && a.w == b.w,
            "load_paired_dataset: pair " + ap.filename().string() + " has mismatched dimensions");
      check(std::min(a.h, a.w) >= crop_size,
            "load_paired_dataset: " + ap.filename().string() + " smaller than crop size");
      ds.pairs.emplace_back(std::move(a), std::move(b));
    }
  } else {  // eightbit: flat directory; targets generated
    auto files = detail::list_images(root);
    check(!files.empty(), "load_paired_dataset: no images under " + root);
    for (const auto& p : files) {
      Image a = to_rgb(read_image(p.string()));
      check(std::min(a.h, a.w) >= crop_size,
            "load_paired_dataset: " + p.filename().string() + " smaller than crop size");
      int trim_h = (a.h / opts.eightbit_block) * opts.eightbit_block;
      int trim_w = (a.w / opts.eightbit_block) * opts.eightbit_block;
      a = crop(a, 0, 0, std::min(trim_h, trim_w));
      Image b = make_eightbit_target(a, opts.eightbit_levels, opts.eightbit_block);
      ds.pairs.emplace_back(std::move(a), std::move(b));
    }
  }
  detail::split_indices(static_cast<int>(ds.pairs.size()), opts.test_fraction, opts.seed,
                        ds.train_idx, ds.test_idx);
  return ds;
}

// Unpaired image corpus (the generic-image training pool).
inline std::vector<Image> make_synthetic_corpus(int n, int size, uint64_t seed) {
  std::vector<Image> out;
  out.reserve(n);
  RandomSource base(seed);
  for (int i = 0; i < n; ++i) {
    RandomSource r = base.child(500000 + i);
    out.push_back(synthetic_clean_image(size, r));
  }
  return out;
}

inline std::vector<Image> load_corpus(const std::string& root, int n, int size, uint64_t seed) {
  if (root.empty()) return make_synthetic_corpus(n, size, seed);
  auto files = detail::list_images(root);
  check(!files.empty(), "load_corpus: no images under " + root);
  std::vector<Image> out;
  RandomSource rng(seed);
  for (size_t i = 0; i < files.size() && static_cast<int>(out.size()) < n; ++i) {
    Image img = to_rgb(read_image(files[i].string()));
    check(std::min(img.h, img.w) >= size, "load_corpus: " + files[i].string() + " smaller than crop");
    out.push_back(random_crop(img, size, rng));
  }
  check(static_cast<int>(out.size()) == n,
        "load_corpus: requested " + std::to_string(n) + " images, found " +
            std::to_string(out.size()));
  return out;
}

}  // namespace wmlab
