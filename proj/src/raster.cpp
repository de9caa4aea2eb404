#include "cad2osm/raster.hpp"

#include "cad2osm/errors.hpp"

#include <cmath>
#include <sstream>

namespace cad2osm {
namespace {

class StrokePainter {
 public:
  StrokePainter(Mask& cells, const GridTransform& t, double scale)
      : cells_(cells), t_(t), scale_(scale) {}

  // Steps along the major axis and rounds the exact line on the minor axis,
  // which is Bresenham for integer endpoints and stays within half a pixel of
  // the true segment otherwise.
  void segment(const Point2d& a_units, const Point2d& b_units) {
    const Point2d a = t_.world_to_pixel(a_units * scale_);
    const Point2d b = t_.world_to_pixel(b_units * scale_);
    const Point2d d = b - a;
    if (std::abs(d.x()) >= std::abs(d.y())) {
      const long x0 = std::lround(a.x());
      const long x1 = std::lround(b.x());
      const long step = x1 >= x0 ? 1 : -1;
      for (long x = x0;; x += step) {
        const double y = d.x() == 0.0 ? a.y() : a.y() + (double(x) - a.x()) * d.y() / d.x();
        set(x, std::lround(y));
        if (x == x1) break;
      }
    } else {
      const long y0 = std::lround(a.y());
      const long y1 = std::lround(b.y());
      const long step = y1 >= y0 ? 1 : -1;
      for (long y = y0;; y += step) {
        const double x = a.x() + (double(y) - a.y()) * d.x() / d.y();
        set(std::lround(x), y);
        if (y == y1) break;
      }
    }
  }

  // Arc sweep counter-clockwise from start to start + sweep (radians), chord
  // error kept below a quarter pixel.
  void arc(const Point2d& c, double r, double start, double sweep) {
    const double r_m = r * scale_;
    const double tol = t_.resolution / 4.0;
    const double max_step = r_m > tol ? 2.0 * std::acos(1.0 - tol / r_m) : kPi / 2.0;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(sweep) / max_step)));
    Point2d prev = c + r * Point2d(std::cos(start), std::sin(start));
    for (int i = 1; i <= n; ++i) {
      const double a = start + sweep * double(i) / n;
      const Point2d next = c + r * Point2d(std::cos(a), std::sin(a));
      segment(prev, next);
      prev = next;
    }
  }

  void bulge_segment(const Point2d& a, const Point2d& b, double bulge) {
    if (bulge == 0.0) {
      segment(a, b);
      return;
    }
    const double theta = 4.0 * std::atan(bulge);  // signed included angle
    const double chord = (b - a).norm();
    if (chord == 0.0) return;
    const double r = chord / (2.0 * std::sin(std::abs(theta) / 2.0));
    const Point2d mid = (a + b) / 2.0;
    const Point2d dir = (b - a) / chord;
    const Point2d normal(-dir.y(), dir.x());
    // Center lies left of a->b for positive (counter-clockwise) bulges.
    const double h = r * std::cos(std::abs(theta) / 2.0);
    const double side = (std::abs(theta) < kPi) ? 1.0 : -1.0;
    const Point2d c = mid + normal * (bulge > 0 ? side * h : -side * h);
    const double start = std::atan2(a.y() - c.y(), a.x() - c.x());
    arc(c, r, start, theta);
  }

 private:
  void set(long col, long row) {
    if (row < 0 || col < 0 || row >= cells_.rows() || col >= cells_.cols()) return;
    cells_(row, col) = 1;
  }

  Mask& cells_;
  const GridTransform& t_;
  double scale_;
};

Mask threshold_distance(const FeatureTransform& ft, double max_sq, bool keep_le) {
  Mask out(ft.squared_distance.rows(), ft.squared_distance.cols());
  if (keep_le)
    out = (ft.squared_distance <= max_sq).cast<std::uint8_t>();
  else
    out = (ft.squared_distance > max_sq).cast<std::uint8_t>();
  return out;
}

}  // namespace

bool OccupancyGrid::border_free() const {
  const auto h = cells.rows();
  const auto w = cells.cols();
  if (h == 0 || w == 0) return true;
  return cells.row(0).maxCoeff() == 0 && cells.row(h - 1).maxCoeff() == 0 &&
         cells.col(0).maxCoeff() == 0 && cells.col(w - 1).maxCoeff() == 0;
}

OccupancyGrid rasterize(const CadDocument& doc, double resolution) {
  if (!(resolution >= 0.005 && resolution <= 0.2))
    throw InvalidResolution("resolution " + std::to_string(resolution) +
                            " m/px outside [0.005, 0.2]");
  Box2d box;
  for (const auto& [name, list] : doc.layers)
    for (const auto& e : list)
      if (!std::holds_alternative<Text>(e)) box.extend(entity_bounds(e));
  if (box.isEmpty()) throw DegenerateExtents("no structural geometry to rasterize");
  const Point2d lo = box.min() * doc.drawing_unit_scale;
  const Point2d hi = box.max() * doc.drawing_unit_scale;
  if ((hi - lo).maxCoeff() <= 0.0) throw DegenerateExtents("structural geometry is a single point");

  OccupancyGrid grid;
  grid.transform.resolution = resolution;
  grid.transform.origin_world = lo - Point2d::Constant(kRasterPadding * resolution);
  const Point2d span = (hi - lo) / resolution;
  const long cols = static_cast<long>(std::ceil(span.x())) + 1 + 2 * kRasterPadding;
  const long rows = static_cast<long>(std::ceil(span.y())) + 1 + 2 * kRasterPadding;
  grid.cells.setZero(rows, cols);

  StrokePainter paint(grid.cells, grid.transform, doc.drawing_unit_scale);
  for (const auto& [name, list] : doc.layers) {
    for (const auto& e : list) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Line>) {
              paint.segment(v.p1, v.p2);
            } else if constexpr (std::is_same_v<T, Polyline>) {
              const std::size_t n = v.vertices.size();
              const std::size_t segs = v.closed ? n : n - 1;
              for (std::size_t i = 0; i < segs; ++i) {
                const double bulge = v.bulges.empty() ? 0.0 : v.bulges[i];
                paint.bulge_segment(v.vertices[i], v.vertices[(i + 1) % n], bulge);
              }
            } else if constexpr (std::is_same_v<T, Arc>) {
              double sweep = v.end_deg - v.start_deg;
              while (sweep <= 0.0) sweep += 360.0;
              while (sweep > 360.0) sweep -= 360.0;
              paint.arc(v.center, v.radius, v.start_deg * kPi / 180.0, sweep * kPi / 180.0);
            } else if constexpr (std::is_same_v<T, Circle>) {
              paint.arc(v.center, v.radius, 0.0, 2.0 * kPi);
            }
          },
          e);
    }
  }
  return grid;
}

Mask dilate(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  return threshold_distance(feature_transform(mask), double(radius) * radius, true);
}

Mask erode(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  const Mask outside = (mask == 0).cast<std::uint8_t>();
  if (outside.maxCoeff() == 0) {
    // No background inside the frame: only the frame edge erodes.
    Mask padded = Mask::Zero(mask.rows() + 2, mask.cols() + 2);
    padded.block(1, 1, mask.rows(), mask.cols()) = mask;
    return erode(padded, radius).block(1, 1, mask.rows(), mask.cols());
  }
  // Background beyond the frame matters only within `radius` of the edge.
  Mask padded = Mask::Zero(mask.rows() + 2 * radius, mask.cols() + 2 * radius);
  padded.block(radius, radius, mask.rows(), mask.cols()) = mask;
  const Mask bg = (padded == 0).cast<std::uint8_t>();
  const Mask inner = threshold_distance(feature_transform(bg), double(radius) * radius, false);
  return inner.block(radius, radius, mask.rows(), mask.cols());
}

OccupancyGrid thicken_and_close(const OccupancyGrid& grid, int wall_thickness_px,
                                int gap_bridge_px) {
  if (wall_thickness_px < 1) throw ConfigError("wall_thickness_px must be >= 1");
  if (gap_bridge_px < 0) throw ConfigError("gap_bridge_px must be >= 0");
  const int thick_r = (wall_thickness_px + 1) / 2;
  const int pad = thick_r + gap_bridge_px;

  OccupancyGrid out;
  out.transform = grid.transform;
  out.transform.origin_world -= Point2d::Constant(pad * grid.transform.resolution);
  Mask padded = Mask::Zero(grid.cells.rows() + 2 * pad, grid.cells.cols() + 2 * pad);
  padded.block(pad, pad, grid.cells.rows(), grid.cells.cols()) = grid.cells;

  Mask walls = dilate(padded, thick_r);
  if (gap_bridge_px > 0) walls = erode(dilate(walls, gap_bridge_px), gap_bridge_px);
  out.cells = std::move(walls);
  return out;
}

FreeSpace free_space_components(const OccupancyGrid& grid) {
  const Mask free = (grid.cells == 0).cast<std::uint8_t>();
  Components comps = label_components(free, 4);
  FreeSpace out;
  out.labels.setConstant(grid.cells.rows(), grid.cells.cols(), -1);
  if (comps.count == 0) throw NoInteriorSpace("grid has no free space");

  // Any component touching the frame is exterior.
  std::vector<char> exterior(comps.count, 0);
  const auto h = grid.cells.rows();
  const auto w = grid.cells.cols();
  for (Eigen::Index c = 0; c < w; ++c) {
    if (comps.labels(0, c) >= 0) exterior[comps.labels(0, c)] = 1;
    if (comps.labels(h - 1, c) >= 0) exterior[comps.labels(h - 1, c)] = 1;
  }
  for (Eigen::Index r = 0; r < h; ++r) {
    if (comps.labels(r, 0) >= 0) exterior[comps.labels(r, 0)] = 1;
    if (comps.labels(r, w - 1) >= 0) exterior[comps.labels(r, w - 1)] = 1;
  }
  std::vector<int> remap(comps.count, 0);
  for (int k = 0; k < comps.count; ++k)
    if (!exterior[k]) remap[k] = ++out.interior_count;
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c)
      if (comps.labels(r, c) >= 0) out.labels(r, c) = remap[comps.labels(r, c)];
  if (out.interior_count == 0)
    throw NoInteriorSpace("no enclosed free space; walls are not watertight");
  return out;
}

std::string write_pgm(const OccupancyGrid& grid) {
  std::ostringstream out;
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  std::string row(static_cast<std::size_t>(grid.width()), '\0');
  for (int r = grid.height() - 1; r >= 0; --r) {
    for (int c = 0; c < grid.width(); ++c)
      row[static_cast<std::size_t>(c)] = grid.occupied(r, c) ? '\0' : '\xFF';
    out << row;
  }
  return out.str();
}

}  // namespace cad2osm
