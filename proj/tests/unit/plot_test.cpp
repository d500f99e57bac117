#include "stua/plot.hpp"

#include "stua/csv_io.hpp"

#include "test_util.hpp"

namespace {

using namespace stua;

TEST(Image, SetAndClip) {
  plot::Image img(4, 3);
  EXPECT_EQ(img.pixels().size(), 36u);
  img.set(1, 2, {10, 20, 30});
  img.set(9, 9, {1, 1, 1});
  EXPECT_EQ(img.at(1, 2).g, 20);
  EXPECT_EQ(img.at(0, 0).r, 255);
}

TEST(Image, LineCoversEndpoints) {
  plot::Image img(10, 10);
  img.line(0, 0, 9, 9, {0, 0, 0});
  for (int k = 0; k < 10; ++k) EXPECT_EQ(img.at(k, k).r, 0);
}

TEST(Colormap, ClampsAndEndsDiffer) {
  const auto lo = plot::colormap(-1.0), a = plot::colormap(0.0);
  const auto hi = plot::colormap(2.0), b = plot::colormap(1.0);
  EXPECT_EQ(lo.r, a.r);
  EXPECT_EQ(hi.b, b.b);
  EXPECT_FALSE(a.r == b.r && a.g == b.g && a.b == b.b);
}

TEST(WritePng, ProducesAPngFile) {
  stua::testing::TempDir dir;
  Vector t(5), e(5), s(5);
  t << 1, 2, 3, 2, 1;
  e << 1.2, 2.1, 2.8, 2.2, 0.9;
  s << 0.3, 0.3, 0.4, 0.2, 0.1;
  plot::write_png(dir / "chart.png", plot::interval_chart(t, e, s));
  const std::string bytes = io::read_file(dir / "chart.png");
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(1, 3), "PNG");
}

TEST(SpatialHeatmap, MarksSites) {
  Eigen::MatrixX2d xy(2, 2);
  xy << 0, 0, 1, 1;
  Vector v(2);
  v << 0, 1;
  const auto img = plot::spatial_heatmap(xy, v, 64);
  EXPECT_EQ(img.width(), 64);
  EXPECT_EQ(img.height(), 64);
}

}  // namespace
