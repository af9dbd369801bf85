#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace onebit {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 255) : width(w), height(h), pixels(std::size_t(w) * h * 3, fill) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

struct PlotPanel {
  std::string title;
  Eigen::MatrixXd values;  // rows: antennas, cols: users
};

/// Side-by-side heat maps on a shared symmetric colour scale with tick labels
/// and one colour bar.
RgbImage render_panels(const std::vector<PlotPanel>& panels);

/// Deterministic PNG bytes (no timestamps or text chunks).
std::string encode_png(const RgbImage& image);

/// Heat map of Re(X) with antenna / user axes, written as PNG.
void plot_channel(const Eigen::MatrixXcd& x, const std::filesystem::path& path, const std::string& title = "re(h)");

/// Diverging blue-white-red map of t in [-1, 1].
void diverging_color(double t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

}  // namespace onebit
