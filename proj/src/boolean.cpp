#include "cad2osm/boolean.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace bg = boost::geometry;

namespace cad2osm {
namespace {

using BgPoint = bg::model::d2::point_xy<double>;
// Counter-clockwise, open rings to match Ring2d storage.
using BgPolygon = bg::model::polygon<BgPoint, false, false>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;

BgPolygon to_bg(const Ring2d& ring) {
  BgPolygon poly;
  for (const auto& p : ring) poly.outer().emplace_back(p.x(), p.y());
  bg::correct(poly);
  return poly;
}

bool degenerate(const Ring2d& r) { return r.size() < 3 || area(r) <= 0.0; }

}  // namespace

double intersection_area(const Ring2d& a, const Ring2d& b) {
  if (degenerate(a) || degenerate(b)) return 0.0;
  const BgPolygon pa = to_bg(a);
  const BgPolygon pb = to_bg(b);
  bg::model::box<BgPoint> ba, bb;
  bg::envelope(pa, ba);
  bg::envelope(pb, bb);
  if (!bg::intersects(ba, bb)) return 0.0;
  BgMulti out;
  bg::intersection(pa, pb, out);
  return bg::area(out);
}

double iou(const Ring2d& a, const Ring2d& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = area(a) + area(b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double symmetric_difference_area(const Ring2d& a, const Ring2d& b) {
  return area(a) + area(b) - 2.0 * intersection_area(a, b);
}

std::vector<Ring2d> union_rings(const Ring2d& a, const Ring2d& b) {
  BgMulti out;
  bg::union_(to_bg(a), to_bg(b), out);
  std::vector<Ring2d> rings;
  for (const auto& poly : out) {
    Ring2d ring;
    for (const auto& p : poly.outer()) ring.emplace_back(p.x(), p.y());
    make_ccw(ring);
    rings.push_back(std::move(ring));
  }
  return rings;
}

double ring_distance(const Ring2d& a, const Ring2d& b) {
  return bg::distance(to_bg(a), to_bg(b));
}

}  // namespace cad2osm
