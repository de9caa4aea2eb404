#pragma once

// Preview image of a segmentation: structure in black, each room in its own
// color, passages as red strokes. North is up.

#include "cad2osm/area_graph.hpp"
#include "cad2osm/raster.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cad2osm {

/// RGB pixels, row 0 at the top.
struct RgbImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;

  void set(int col, int row, std::array<std::uint8_t, 3> rgb);
  [[nodiscard]] std::array<std::uint8_t, 3> get(int col, int row) const;
};

RgbImage render_segmentation(const OccupancyGrid& grid, const AreaGraph& graph);

/// PNG file bytes.
std::string encode_png(const RgbImage& image);

inline std::string render_png(const OccupancyGrid& grid, const AreaGraph& graph) {
  return encode_png(render_segmentation(grid, graph));
}

}  // namespace cad2osm
