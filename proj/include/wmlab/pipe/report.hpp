#pragma once

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "wmlab/eval/forensics.hpp"
#include "wmlab/eval/metrics.hpp"
#include "wmlab/img/imageio.hpp"

namespace wmlab {

// ---------------------------------------------------------------------------
// CSV + text tables

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline void write_rows_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  check(f.good(), "write_rows_csv: cannot open " + path);
  f << "condition,psnr,ssim,ncc,sr,n\n";
  for (const auto& r : rows) {
    f << r.label << "," << (r.psnr_mean ? fmt6(*r.psnr_mean) : "") << ","
      << (r.ssim_mean ? fmt6(*r.ssim_mean) : "") << "," << fmt6(r.ncc_mean) << "," << fmt6(r.sr)
      << "," << r.n << "\n";
  }
}

inline std::vector<EvalRow> read_rows_csv(const std::string& path) {
  std::ifstream f(path);
  check(f.good(), "read_rows_csv: cannot open " + path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<EvalRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    EvalRow r;
    std::getline(ss, r.label, ',');
    std::getline(ss, cell, ',');
    if (!cell.empty()) r.psnr_mean = std::stod(cell);
    std::getline(ss, cell, ',');
    if (!cell.empty()) r.ssim_mean = std::stod(cell);
    std::getline(ss, cell, ',');
    r.ncc_mean = std::stod(cell);
    std::getline(ss, cell, ',');
    r.sr = std::stod(cell);
    std::getline(ss, cell, ',');
    r.n = std::stoi(cell);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_ncc_csv(const std::string& path, const EvalRow& row) {
  std::ofstream f(path, std::ios::trunc);
  check(f.good(), "write_ncc_csv: cannot open " + path);
  f << "index,ncc\n";
  for (size_t i = 0; i < row.ncc_samples.size(); ++i)
    f << i << "," << fmt6(row.ncc_samples[i]) << "\n";
}

inline void write_spectrum_csv(const std::string& path,
                               const std::vector<std::pair<std::string, SpectrumProfile>>& curves) {
  check(!curves.empty(), "write_spectrum_csv: no curves");
  std::ofstream f(path, std::ios::trunc);
  check(f.good(), "write_spectrum_csv: cannot open " + path);
  f << "radius";
  for (const auto& [name, _] : curves) f << "," << name;
  f << "\n";
  size_t bins = curves[0].second.amplitudes.size();
  for (size_t b = 0; b < bins; ++b) {
    f << b;
    for (const auto& [_, prof] : curves) f << "," << fmt6(prof.amplitudes[b]);
    f << "\n";
  }
}

inline std::string format_rows_text(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  size_t lw = 12;
  for (const auto& r : rows) lw = std::max(lw, r.label.size());
  os << std::left << std::setw(static_cast<int>(lw + 2)) << "Condition" << std::right
     << std::setw(9) << "PSNR" << std::setw(9) << "SSIM" << std::setw(9) << "NCC" << std::setw(9)
     << "SR(%)" << std::setw(6) << "n" << "\n";
  os << std::string(lw + 2 + 9 * 4 + 6, '-') << "\n";
  auto cell = [](std::optional<double> v) {
    if (!v) return std::string("/");
    char b[32];
    std::snprintf(b, sizeof(b), "%.4f", *v);
    return std::string(b);
  };
  for (const auto& r : rows) {
    char nccb[32], srb[32];
    std::snprintf(nccb, sizeof(nccb), "%.4f", r.ncc_mean);
    std::snprintf(srb, sizeof(srb), "%.2f", r.sr);
    os << std::left << std::setw(static_cast<int>(lw + 2)) << r.label << std::right
       << std::setw(9) << cell(r.psnr_mean) << std::setw(9) << cell(r.ssim_mean) << std::setw(9)
       << nccb << std::setw(9) << srb << std::setw(6) << r.n << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// drawing

namespace draw {

inline void fill(Image& img, float r, float g, float b) {
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
}

inline void put_px(Image& img, int y, int x, float r, float g, float b) {
  if (y < 0 || y >= img.h || x < 0 || x >= img.w) return;
  img.at(y, x, 0) = r;
  img.at(y, x, 1) = g;
  img.at(y, x, 2) = b;
}

inline void line(Image& img, int y0, int x0, int y1, int x1, float r, float g, float b) {
  int dy = std::abs(y1 - y0), dx = std::abs(x1 - x0);
  int sy = y0 < y1 ? 1 : -1, sx = x0 < x1 ? 1 : -1;
  int err = (dx > dy ? dx : -dy) / 2;
  for (;;) {
    put_px(img, y0, x0, r, g, b);
    if (y0 == y1 && x0 == x1) break;
    int e2 = err;
    if (e2 > -dx) {
      err -= dy;
      x0 += sx;
    }
    if (e2 < dy) {
      err += dx;
      y0 += sy;
    }
  }
}

// 5x7 bitmap glyphs for legends and axis labels.
inline const uint8_t* glyph(char c) {
  static const std::map<char, std::array<uint8_t, 7>> font = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
      {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
      {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
      {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
      {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
      {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
  };
  auto it = font.find(c);
  return it == font.end() ? font.at(' ').data() : it->second.data();
}

inline void text(Image& img, int y, int x, const std::string& s, float r, float g, float b) {
  int cx = x;
  for (char raw : s) {
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
    const uint8_t* gl = glyph(c);
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (gl[row] & (1 << (4 - col))) put_px(img, y + row, cx + col, r, g, b);
    cx += 6;
  }
}

}  // namespace draw

// Tile rows of images into one grid (uniform cell size, 2px separators).
inline Image make_grid(const std::vector<std::vector<Image>>& rows, int pad = 2) {
  check(!rows.empty() && !rows[0].empty(), "make_grid: empty");
  int ch = rows[0][0].h, cw = rows[0][0].w;
  size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  Image grid(static_cast<int>(rows.size()) * (ch + pad) + pad,
             static_cast<int>(cols) * (cw + pad) + pad, 3, 1.f);
  for (size_t ri = 0; ri < rows.size(); ++ri) {
    for (size_t ci = 0; ci < rows[ri].size(); ++ci) {
      Image cell = to_rgb(rows[ri][ci]);
      check(cell.h == ch && cell.w == cw, "make_grid: mixed cell sizes");
      int oy = static_cast<int>(ri) * (ch + pad) + pad;
      int ox = static_cast<int>(ci) * (cw + pad) + pad;
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
          for (int c = 0; c < 3; ++c) grid.at(oy + y, ox + x, c) = cell.at(y, x, c);
    }
  }
  return grid;
}

// Line plot of azimuthal spectra, one curve per condition, sample count in
// the legend.
inline Image render_spectrum_plot(const std::vector<std::pair<std::string, SpectrumProfile>>& curves,
                                  int n_images, int width = 640, int height = 420) {
  check(!curves.empty(), "render_spectrum_plot: no curves");
  Image img(height, width, 3);
  draw::fill(img, 1.f, 1.f, 1.f);
  const int ml = 56, mr = 16, mt = 16, mb = 40;
  const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;
  draw::line(img, py1, px0, py1, px1, 0, 0, 0);
  draw::line(img, py0, px0, py1, px0, 0, 0, 0);

  double lo = 1e30, hi = -1e30;
  size_t bins = 0;
  for (const auto& [_, p] : curves) {
    bins = std::max(bins, p.amplitudes.size());
    for (double a : p.amplitudes) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (hi <= lo) hi = lo + 1;
  const float colors[6][3] = {{0.85f, 0.1f, 0.1f}, {0.1f, 0.3f, 0.85f}, {0.1f, 0.6f, 0.2f},
                              {0.8f, 0.5f, 0.0f},  {0.5f, 0.1f, 0.7f}, {0.0f, 0.6f, 0.6f}};
  auto X = [&](size_t b) {
    return px0 + static_cast<int>((px1 - px0) * (bins <= 1 ? 0.0 : double(b) / (bins - 1)));
  };
  auto Y = [&](double a) { return py1 - static_cast<int>((py1 - py0) * (a - lo) / (hi - lo)); };

  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& prof = curves[ci].second;
    const float* col = colors[ci % 6];
    for (size_t b = 1; b < prof.amplitudes.size(); ++b)
      draw::line(img, Y(prof.amplitudes[b - 1]), X(b - 1), Y(prof.amplitudes[b]), X(b), col[0],
                 col[1], col[2]);
    int ly = mt + 6 + static_cast<int>(ci) * 11;
    draw::line(img, ly + 3, px1 - 150, ly + 3, px1 - 132, col[0], col[1], col[2]);
    draw::text(img, ly, px1 - 128, curves[ci].first, 0, 0, 0);
  }
  draw::text(img, py1 + 10, (px0 + px1) / 2 - 60, "RADIAL FREQUENCY", 0, 0, 0);
  draw::text(img, py1 + 22, px0, "N=" + std::to_string(n_images) + " IMAGES PER CURVE", 0.3f, 0.3f,
             0.3f);
  draw::text(img, py0, 4, "LOG POWER", 0, 0, 0);
  char b0[32], b1[32];
  std::snprintf(b0, sizeof(b0), "%.1f", lo);
  std::snprintf(b1, sizeof(b1), "%.1f", hi);
  draw::text(img, py1 - 7, 4, b0, 0, 0, 0);
  draw::text(img, py0 + 10, 4, b1, 0, 0, 0);
  draw::text(img, py1 + 10, px0 - 4, "0", 0, 0, 0);
  draw::text(img, py1 + 10, px1 - 12, std::to_string(bins - 1), 0, 0, 0);
  return img;
}

}  // namespace wmlab
