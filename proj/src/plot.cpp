#include "onebit/plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <png.h>

namespace onebit {

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  auto* p = &pixels[(std::size_t(y) * width + x) * 3];
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

void diverging_color(double t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  t = std::clamp(t, -1.0, 1.0);
  // endpoints: (33, 102, 172) blue, (178, 24, 43) red
  const double s = std::abs(t);
  const std::array<double, 3> end = t < 0 ? std::array<double, 3>{33, 102, 172} : std::array<double, 3>{178, 24, 43};
  r = static_cast<std::uint8_t>(std::lround(255 + (end[0] - 255) * s));
  g = static_cast<std::uint8_t>(std::lround(255 + (end[1] - 255) * s));
  b = static_cast<std::uint8_t>(std::lround(255 + (end[2] - 255) * s));
}

namespace {

// 3x5 glyphs, one octal digit per row, high bit leftmost.
const std::map<char, std::array<int, 5>>& font() {
  static const std::map<char, std::array<int, 5>> f{
      {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
      {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}},
      {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}},
      {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}}, {'E', {7, 4, 6, 4, 7}}, {'F', {7, 4, 6, 4, 4}},
      {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}}, {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}},
      {'K', {5, 5, 6, 5, 5}}, {'L', {4, 4, 4, 4, 7}}, {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}},
      {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}}, {'Q', {2, 5, 5, 6, 3}}, {'R', {6, 5, 6, 5, 5}},
      {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}}, {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}},
      {'W', {5, 5, 7, 7, 5}}, {'X', {5, 5, 2, 5, 5}}, {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}},
      {'-', {0, 0, 7, 0, 0}}, {'.', {0, 0, 0, 0, 2}}, {' ', {0, 0, 0, 0, 0}}, {'(', {1, 2, 2, 2, 1}},
      {')', {4, 2, 2, 2, 4}}, {'=', {0, 7, 0, 7, 0}}, {'/', {1, 1, 2, 4, 4}}, {'+', {0, 2, 7, 2, 0}},
      {':', {0, 2, 0, 2, 0}}, {'_', {0, 0, 0, 0, 7}},
  };
  return f;
}

constexpr int kFontScale = 2;
constexpr int kGlyphAdvance = 4 * kFontScale;
constexpr int kGlyphHeight = 5 * kFontScale;

int text_width(const std::string& s) { return static_cast<int>(s.size()) * kGlyphAdvance; }

void draw_text(RgbImage& img, int x, int y, const std::string& s) {
  for (char ch : s) {
    const auto it = font().find(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (it != font().end())
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if (it->second[row] & (4 >> col))
            for (int dy = 0; dy < kFontScale; ++dy)
              for (int dx = 0; dx < kFontScale; ++dx)
                img.set(x + col * kFontScale + dx, y + row * kFontScale + dy, 0, 0, 0);
    x += kGlyphAdvance;
  }
}

void draw_rect(RgbImage& img, int x0, int y0, int w, int h) {
  for (int x = x0 - 1; x <= x0 + w; ++x) {
    img.set(x, y0 - 1, 0, 0, 0);
    img.set(x, y0 + h, 0, 0, 0);
  }
  for (int y = y0 - 1; y <= y0 + h; ++y) {
    img.set(x0 - 1, y, 0, 0, 0);
    img.set(x0 + w, y, 0, 0, 0);
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

RgbImage render_panels(const std::vector<PlotPanel>& panels) {
  if (panels.empty()) throw std::invalid_argument("render_panels: no panels");
  const auto rows = panels[0].values.rows(), cols = panels[0].values.cols();
  if (rows == 0 || cols == 0) throw std::invalid_argument("render_panels: empty matrix");
  double range = 0.0;
  for (const auto& p : panels) {
    if (p.values.rows() != rows || p.values.cols() != cols)
      throw std::invalid_argument("render_panels: panels differ in shape");
    if (!p.values.allFinite()) throw std::invalid_argument("render_panels: non-finite values in " + p.title);
    range = std::max(range, p.values.cwiseAbs().maxCoeff());
  }
  if (range == 0.0) range = 1.0;

  const int cell = std::max(2, 320 / static_cast<int>(std::max(rows, cols)));
  const int map_w = cell * static_cast<int>(cols), map_h = cell * static_cast<int>(rows);
  const int left = text_width(std::to_string(rows - 1)) + 3 * kGlyphAdvance, top = 3 * kGlyphHeight;
  const int gap = 2 * kGlyphAdvance;
  const int panel_w = left + map_w + gap;
  const int bar_w = 16, bar_x = static_cast<int>(panels.size()) * panel_w + gap;
  const int width = bar_x + bar_w + 6 * kGlyphAdvance;
  const int height = top + map_h + 4 * kGlyphHeight;
  RgbImage img(width, height);

  for (std::size_t n = 0; n < panels.size(); ++n) {
    const int x0 = static_cast<int>(n) * panel_w + left, y0 = top;
    draw_text(img, x0 + (map_w - text_width(panels[n].title)) / 2, kGlyphHeight, panels[n].title);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::uint8_t R, G, B;
        diverging_color(panels[n].values(r, c) / range, R, G, B);
        for (int dy = 0; dy < cell; ++dy)
          for (int dx = 0; dx < cell; ++dx) img.set(x0 + int(c) * cell + dx, y0 + int(r) * cell + dy, R, G, B);
      }
    draw_rect(img, x0, y0, map_w, map_h);
    // antenna ticks on the left, user ticks below
    for (Eigen::Index r : {Eigen::Index(0), rows / 2, rows - 1}) {
      const std::string s = std::to_string(r);
      const int y = y0 + int(r) * cell + cell / 2;
      draw_text(img, x0 - 4 - text_width(s), y - kGlyphHeight / 2, s);
      img.set(x0 - 2, y, 0, 0, 0);
    }
    for (Eigen::Index c : {Eigen::Index(0), cols / 2, cols - 1}) {
      const std::string s = std::to_string(c);
      const int x = x0 + int(c) * cell + cell / 2;
      draw_text(img, x - text_width(s) / 2, y0 + map_h + 4, s);
      img.set(x, y0 + map_h + 1, 0, 0, 0);
    }
    draw_text(img, x0 + (map_w - text_width("user")) / 2, y0 + map_h + 4 + 2 * kGlyphHeight, "user");
  }
  draw_text(img, 2, top + map_h / 2, "ant");

  for (int y = 0; y < map_h; ++y) {
    std::uint8_t R, G, B;
    diverging_color(1.0 - 2.0 * y / std::max(1, map_h - 1), R, G, B);
    for (int x = 0; x < bar_w; ++x) img.set(bar_x + x, top + y, R, G, B);
  }
  draw_rect(img, bar_x, top, bar_w, map_h);
  draw_text(img, bar_x + bar_w + 4, top, fmt(range));
  draw_text(img, bar_x + bar_w + 4, top + map_h / 2 - kGlyphHeight / 2, "0");
  draw_text(img, bar_x + bar_w + 4, top + map_h - kGlyphHeight, fmt(-range));
  draw_text(img, bar_x - 4, kGlyphHeight, "re(h)");
  return img;
}

std::string encode_png(const RgbImage& image) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("encode_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("encode_png: libpng init failed");
  }
  std::string out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("encode_png: libpng error");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), len);
      },
      nullptr);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y)
    png_write_row(png, const_cast<png_bytep>(&image.pixels[std::size_t(y) * image.width * 3]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void plot_channel(const Eigen::MatrixXcd& x, const std::filesystem::path& path, const std::string& title) {
  const std::string png = encode_png(render_panels({{title, x.real()}}));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("plot_channel: cannot write " + path.string());
  out.write(png.data(), static_cast<std::streamsize>(png.size()));
  if (!out) throw std::runtime_error("plot_channel: write failed for " + path.string());
}

}  // namespace onebit
