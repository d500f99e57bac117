#include "stua/plot.hpp"

#include "stua/errors.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

namespace stua::plot {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) fail(ErrorKind::InvalidConfig, "image dimensions must be positive");
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t k = 0; k < data_.size(); k += 3) {
    data_[k] = fill.r;
    data_[k + 1] = fill.g;
    data_[k + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  return {data_.at(k), data_.at(k + 1), data_.at(k + 2)};
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const std::size_t k = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  data_[k] = c.r;
  data_[k + 1] = c.g;
  data_[k + 2] = c.b;
}

void Image::line(int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Image::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set(x, y, c);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(tmp.c_str(), "wb"));
    if (!file) fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      fail(ErrorKind::Io, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      fail(ErrorKind::Io, "libpng failed writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto stride = static_cast<std::size_t>(image.width()) * 3;
    for (int y = 0; y < image.height(); ++y) {
      png_write_row(png, const_cast<png_bytep>(image.pixels().data() + static_cast<std::size_t>(y) * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

Rgb colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> anchors{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0) * static_cast<double>(anchors.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(t), anchors.size() - 2);
  const double w = t - static_cast<double>(k);
  auto mix = [&](int c) {
    return static_cast<std::uint8_t>(std::lround(anchors[k][c] * (1.0 - w) + anchors[k + 1][c] * w));
  };
  return {mix(0), mix(1), mix(2)};
}

Image interval_chart(const Vector& truth, const Vector& estimate, const Vector& sigma, int width, int height) {
  const Eigen::Index n = truth.size();
  if (estimate.size() != n || sigma.size() != n) fail(ErrorKind::DimensionMismatch, "interval_chart: series lengths differ");
  Image img(width, height);
  if (n == 0) return img;
  const Vector band = sigma.cwiseAbs();
  double lo = std::min(truth.minCoeff(), (estimate - band).minCoeff());
  double hi = std::max(truth.maxCoeff(), (estimate + band).maxCoeff());
  if (!(hi > lo)) hi = lo + 1.0;
  const int margin = 8;
  auto px = [&](Eigen::Index k) {
    return n == 1 ? width / 2
                  : margin + static_cast<int>(std::lround(static_cast<double>(k) * (width - 2 * margin - 1) / static_cast<double>(n - 1)));
  };
  auto py = [&](double v) {
    return margin + static_cast<int>(std::lround((hi - v) / (hi - lo) * (height - 2 * margin - 1)));
  };
  for (Eigen::Index k = 0; k < n; ++k) {
    const int x0 = px(k);
    const int x1 = k + 1 < n ? px(k + 1) : x0;
    for (int x = x0; x <= x1; ++x) img.line(x, py(estimate(k) + band(k)), x, py(estimate(k) - band(k)), {190, 215, 245});
  }
  img.line(margin, height - margin, width - margin, height - margin, {160, 160, 160});
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    img.line(px(k), py(estimate(k)), px(k + 1), py(estimate(k + 1)), {30, 90, 200});
    img.line(px(k), py(truth(k)), px(k + 1), py(truth(k + 1)), {0, 0, 0});
  }
  return img;
}

Image spatial_heatmap(const Eigen::MatrixX2d& coords, const Vector& values, int size) {
  const Eigen::Index n = coords.rows();
  if (values.size() != n || n == 0) fail(ErrorKind::DimensionMismatch, "spatial_heatmap: one value per region required");
  Image img(size, size);
  const Eigen::Vector2d lo = coords.colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = coords.colwise().maxCoeff().transpose();
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-9});
  const double pad = 0.08 * span;
  const double extent = span + 2 * pad;
  const double vmin = values.minCoeff();
  const double vrange = std::max(values.maxCoeff() - vmin, 1e-12);
  auto world = [&](int x, int y) {
    return Eigen::Vector2d(lo.x() - pad + (x + 0.5) / size * extent, lo.y() - pad + (size - y - 0.5) / size * extent);
  };
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      Eigen::Index best = 0;
      (coords.rowwise() - world(x, y).transpose()).rowwise().squaredNorm().minCoeff(&best);
      img.set(x, y, colormap((values(best) - vmin) / vrange));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const int cx = static_cast<int>((coords(i, 0) - lo.x() + pad) / extent * size);
    const int cy = size - 1 - static_cast<int>((coords(i, 1) - lo.y() + pad) / extent * size);
    img.fill_rect(cx - 2, cy - 2, cx + 2, cy + 2, {0, 0, 0});
  }
  return img;
}

}  // namespace stua::plot
