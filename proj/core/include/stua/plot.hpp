#pragma once

#include "stua/autodiff.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stua::plot {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// 8-bit RGB raster, row-major from the top-left corner.
class Image {
 public:
  Image(int width, int height, Rgb fill = {255, 255, 255});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);  // ignores out-of-range pixels
  void line(int x0, int y0, int x1, int y1, Rgb c);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);
  const std::vector<std::uint8_t>& pixels() const noexcept { return data_; }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Written atomically via a temporary file.
void write_png(const std::filesystem::path& path, const Image& image);

/// Perceptual blue-to-yellow ramp, t clamped to [0, 1].
Rgb colormap(double t);

/// Ground truth (black), point estimate (blue) and the H_hat +- |sigma| band
/// (light blue) over consecutive intervals.
Image interval_chart(const Vector& truth, const Vector& estimate, const Vector& sigma, int width = 640,
                     int height = 240);

/// Each pixel takes the value of its nearest region; region sites are
/// marked in black.
Image spatial_heatmap(const Eigen::MatrixX2d& coords, const Vector& values, int size = 256);

}  // namespace stua::plot
