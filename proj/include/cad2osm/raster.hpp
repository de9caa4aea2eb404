#pragma once

// Vector-to-raster conversion of the structural layers and the morphology
// that makes rooms watertight.

#include "cad2osm/cad.hpp"
#include "cad2osm/image.hpp"

#include <string>

namespace cad2osm {

/// Metric frame of a raster: pixel (col, row) has its center at
/// origin_world + resolution * (col, row). Lattice corner (x, y) sits half a
/// pixel below-left of pixel (x, y)'s center.
struct GridTransform {
  double resolution = 0.05;  // meters per pixel
  Point2d origin_world = Point2d::Zero();

  [[nodiscard]] Point2d pixel_to_world(double col, double row) const {
    return origin_world + resolution * Point2d(col, row);
  }
  [[nodiscard]] Point2d world_to_pixel(const Point2d& p) const {
    return (p - origin_world) / resolution;
  }
  [[nodiscard]] Eigen::Vector2i world_to_cell(const Point2d& p) const {
    const Point2d q = world_to_pixel(p);
    return {static_cast<int>(std::lround(q.x())), static_cast<int>(std::lround(q.y()))};
  }
  [[nodiscard]] Point2d corner_to_world(int x, int y) const {
    return pixel_to_world(x - 0.5, y - 0.5);
  }
};

struct OccupancyGrid {
  GridTransform transform;
  Mask cells;  // 1 = occupied structure, 0 = free

  [[nodiscard]] int width() const { return static_cast<int>(cells.cols()); }
  [[nodiscard]] int height() const { return static_cast<int>(cells.rows()); }
  [[nodiscard]] bool occupied(int row, int col) const { return cells(row, col) != 0; }
  /// One-pixel free margin around the whole grid.
  [[nodiscard]] bool border_free() const;
};

inline constexpr int kRasterPadding = 2;

/// Draws every Line/Polyline/Arc/Circle as 1-px strokes. Text is ignored.
/// Throws InvalidResolution outside [0.005, 0.2] m/px and DegenerateExtents
/// when there is no geometry or it collapses to a single point.
OccupancyGrid rasterize(const CadDocument& doc, double resolution);

/// Dilates structure by a disk of radius ceil(wall_thickness_px / 2), then
/// closes with a disk of radius gap_bridge_px. The grid grows by the sum of
/// both radii on every side so the free border survives.
OccupancyGrid thicken_and_close(const OccupancyGrid& grid, int wall_thickness_px,
                                int gap_bridge_px);

/// Disk morphology on a binary mask (offsets with dx² + dy² <= r²); cells
/// outside the mask count as 0.
Mask dilate(const Mask& mask, int radius);
Mask erode(const Mask& mask, int radius);

struct FreeSpace {
  LabelImage labels;  // -1 occupied, 0 exterior, 1..interior_count interior
  int interior_count = 0;
};

/// 4-connected labeling of free cells. Throws NoInteriorSpace when every free
/// cell is connected to the border.
FreeSpace free_space_components(const OccupancyGrid& grid);

/// Binary PGM (P5), north up: 0 = occupied, 255 = free.
std::string write_pgm(const OccupancyGrid& grid);

}  // namespace cad2osm
