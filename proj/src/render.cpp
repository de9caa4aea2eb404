#include "cad2osm/render.hpp"

#include "cad2osm/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

namespace cad2osm {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

Rgb room_color(std::size_t k) {
  // Golden-angle hue walk in HSV.
  const double h = std::fmod(double(k) * 137.508, 360.0) / 60.0;
  const double s = 0.45, v = 0.95;
  const double c = v * s, x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0)), m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  auto to8 = [m](double u) { return static_cast<std::uint8_t>(std::lround((u + m) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

void fill_ring(RgbImage& img, const Ring2d& px, Rgb color) {
  // Scanline fill in the (col, row) pixel frame; a pixel is inside when its
  // center is.
  if (px.size() < 3) return;
  double lo = px[0].y(), hi = px[0].y();
  for (const auto& p : px) lo = std::min(lo, p.y()), hi = std::max(hi, p.y());
  const int r0 = std::max(0, static_cast<int>(std::ceil(lo)));
  const int r1 = std::min(img.height - 1, static_cast<int>(std::floor(hi)));
  std::vector<double> xs;
  for (int row = r0; row <= r1; ++row) {
    xs.clear();
    const double y = row;
    for (std::size_t i = 0, j = px.size() - 1; i < px.size(); j = i++) {
      const auto& a = px[i];
      const auto& b = px[j];
      if ((a.y() > y) != (b.y() > y)) xs.push_back(a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int c1 = std::min(img.width - 1, static_cast<int>(std::floor(xs[k + 1])));
      for (int col = c0; col <= c1; ++col) img.set(col, img.height - 1 - row, color);
    }
  }
}

void stroke(RgbImage& img, Point2d a, Point2d b, Rgb color) {
  const int steps = std::max(1, static_cast<int>(std::ceil((b - a).lpNorm<Eigen::Infinity>())));
  for (int s = 0; s <= steps; ++s) {
    const Point2d p = a + (b - a) * (double(s) / steps);
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int col = static_cast<int>(std::lround(p.x())) + dc;
        const int row = static_cast<int>(std::lround(p.y())) + dr;
        if (col >= 0 && row >= 0 && col < img.width && row < img.height)
          img.set(col, img.height - 1 - row, color);
      }
  }
}

void write_to_string(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

}  // namespace

void RgbImage::set(int col, int row, Rgb rgb) {
  std::copy(rgb.begin(), rgb.end(), pixels.begin() + 3 * (std::size_t(row) * width + col));
}

Rgb RgbImage::get(int col, int row) const {
  const auto* p = pixels.data() + 3 * (std::size_t(row) * width + col);
  return {p[0], p[1], p[2]};
}

RgbImage render_segmentation(const OccupancyGrid& grid, const AreaGraph& graph) {
  RgbImage img;
  img.width = grid.width();
  img.height = grid.height();
  img.pixels.assign(std::size_t(img.width) * img.height * 3, 235);

  for (std::size_t k = 0; k < graph.rooms.size(); ++k) {
    Ring2d px;
    for (const auto& p : graph.rooms[k].polygon) px.push_back(grid.transform.world_to_pixel(p));
    fill_ring(img, px, room_color(k));
  }
  for (int row = 0; row < img.height; ++row)
    for (int col = 0; col < img.width; ++col)
      if (grid.occupied(row, col)) img.set(col, img.height - 1 - row, {0, 0, 0});
  for (const auto& p : graph.passages)
    stroke(img, grid.transform.world_to_pixel(p.endpoints[0]), grid.transform.world_to_pixel(p.endpoints[1]),
           {220, 30, 30});
  return img;
}

std::string encode_png(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0) throw SerializationRefused("cannot encode an empty image");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw SerializationRefused("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  std::string out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw SerializationRefused("PNG encoding failed");
  }
  png_set_write_fn(png, &out, write_to_string, nullptr);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int row = 0; row < image.height; ++row)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + 3 * std::size_t(row) * image.width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace cad2osm
