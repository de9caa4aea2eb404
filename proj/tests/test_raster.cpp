#include "cad2osm/errors.hpp"
#include "cad2osm/raster.hpp"

#include <doctest.h>

#include <cmath>

using namespace cad2osm;

namespace {

CadDocument meters(std::vector<CadEntity> entities) {
  CadDocument doc;
  doc.drawing_unit_scale = 1.0;
  doc.layers["A-WALL"] = std::move(entities);
  doc.recompute_extents();
  return doc;
}

Polyline rect(double x0, double y0, double x1, double y1) {
  Polyline p;
  p.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  p.closed = true;
  return p;
}

long occupied_count(const OccupancyGrid& g) { return (g.cells != 0).count(); }

int occupied_components(const OccupancyGrid& g) { return label_components(g.cells, 8).count; }

}  // namespace

TEST_CASE("a 10 m line at 5 cm is a 200 +- 1 pixel stroke") {
  const OccupancyGrid g = rasterize(meters({Line{{0, 0}, {10, 0}}}), 0.05);
  CHECK(std::abs(occupied_count(g) - 200) <= 1);
  CHECK(g.border_free());
}

TEST_CASE("axis-aligned stroke lengths track metric length") {
  for (double len : {0.37, 1.0, 2.45, 7.3, 19.99}) {
    for (bool vertical : {false, true}) {
      const Point2d end = vertical ? Point2d(0.3, 0.2 + len) : Point2d(0.3 + len, 0.2);
      const OccupancyGrid g = rasterize(meters({Line{{0.3, 0.2}, end}}), 0.05);
      const double expected = len / 0.05;
      CAPTURE(len);
      CHECK(double(occupied_count(g)) >= expected - 2);
      CHECK(double(occupied_count(g)) <= expected + 2);
    }
  }
}

TEST_CASE("degenerate input") {
  CHECK_THROWS_AS(rasterize(meters({}), 0.05), DegenerateExtents);
  CHECK_THROWS_AS(rasterize(meters({Line{{1, 1}, {1, 1}}}), 0.05), DegenerateExtents);
}

TEST_CASE("resolution range") {
  const CadDocument doc = meters({Line{{0, 0}, {1, 0}}});
  CHECK_THROWS_AS(rasterize(doc, 0.001), InvalidResolution);
  CHECK_THROWS_AS(rasterize(doc, 0.5), InvalidResolution);
  CHECK_NOTHROW(rasterize(doc, 0.005));
  CHECK_NOTHROW(rasterize(doc, 0.2));
}

TEST_CASE("circle pixels stay within one resolution of the analytic circle") {
  const Point2d c(3, 4);
  const OccupancyGrid g = rasterize(meters({Circle{c, 1.0}}), 0.05);
  long n = 0;
  for (int r = 0; r < g.height(); ++r)
    for (int col = 0; col < g.width(); ++col)
      if (g.occupied(r, col)) {
        ++n;
        const double d = (g.transform.pixel_to_world(col, r) - c).norm();
        CHECK(std::abs(d - 1.0) <= 0.05);
      }
  CHECK(n > 100);
  CHECK(occupied_components(g) == 1);
}

TEST_CASE("bulged polyline segment follows its arc") {
  Polyline p;
  p.vertices = {{0, 0}, {2, 0}};
  p.bulges = {1.0, 0.0};  // half circle of radius 1 below the chord (clockwise bulge would be negative)
  const OccupancyGrid g = rasterize(meters({p}), 0.05);
  const Point2d center(1, 0);
  for (int r = 0; r < g.height(); ++r)
    for (int col = 0; col < g.width(); ++col)
      if (g.occupied(r, col)) CHECK(std::abs((g.transform.pixel_to_world(col, r) - center).norm() - 1.0) <= 0.05);
}

TEST_CASE("pixel and world frames invert on pixel centers") {
  const OccupancyGrid g = rasterize(meters({Line{{-3, 2}, {4, 9}}}), 0.04);
  for (int col : {0, 7, 100})
    for (int row : {0, 3, 55}) {
      const Point2d w = g.transform.pixel_to_world(col, row);
      CHECK(g.transform.world_to_cell(w) == Eigen::Vector2i(col, row));
      CHECK((g.transform.world_to_pixel(w) - Point2d(col, row)).norm() < 1e-9);
    }
  const Point2d corner = g.transform.corner_to_world(4, 6);
  CHECK((corner - g.transform.pixel_to_world(3.5, 5.5)).norm() < 1e-12);
}

TEST_CASE("rasterization is deterministic") {
  const CadDocument doc = meters({rect(0, 0, 5, 4), Circle{{2, 2}, 0.4}, Arc{{1, 1}, 0.5, 10, 200}});
  const OccupancyGrid a = rasterize(doc, 0.05);
  const OccupancyGrid b = rasterize(doc, 0.05);
  CHECK((a.cells == b.cells).all());
  CHECK(write_pgm(a) == write_pgm(b));
}

TEST_CASE("disk morphology") {
  Mask m = Mask::Zero(9, 9);
  m(4, 4) = 1;
  const Mask d = dilate(m, 2);
  CHECK((d != 0).count() == 13);
  CHECK(d(4, 6) == 1);
  CHECK(d(6, 6) == 0);
  const Mask e = erode(d, 2);
  CHECK((e != 0).count() == 1);
  CHECK(e(4, 4) == 1);
  CHECK((dilate(m, 0) == m).all());
}

TEST_CASE("closing bridges small gaps in collinear walls") {
  auto strokes = [](int gap_px) {
    return rasterize(meters({Line{{0, 0}, {2, 0}}, Line{{2 + 0.05 * (gap_px + 1), 0}, {4, 0}}}), 0.05);
  };
  const OccupancyGrid three = strokes(3);
  REQUIRE(occupied_components(three) == 2);
  CHECK(occupied_components(thicken_and_close(three, 3, 2)) == 1);

  // Wide enough that the thickening alone leaves it open.
  const OccupancyGrid five = strokes(5);
  CHECK(occupied_components(thicken_and_close(five, 3, 2)) == 2);
  CHECK(occupied_components(thicken_and_close(five, 3, 3)) == 1);
}

TEST_CASE("no closing means plain dilation") {
  const OccupancyGrid raw = rasterize(meters({rect(0, 0, 2, 1)}), 0.05);
  const OccupancyGrid out = thicken_and_close(raw, 1, 0);
  REQUIRE(out.width() == raw.width() + 2);
  REQUIRE(out.height() == raw.height() + 2);
  Mask padded = Mask::Zero(raw.height() + 2, raw.width() + 2);
  padded.block(1, 1, raw.height(), raw.width()) = raw.cells;
  CHECK((out.cells == dilate(padded, 1)).all());
  CHECK(out.border_free());
  CHECK((out.transform.origin_world - (raw.transform.origin_world - Point2d(0.05, 0.05))).norm() < 1e-12);
}

TEST_CASE("closing is monotone over dilation") {
  const CadDocument doc = meters({rect(0, 0, 3, 3), Line{{1, 0}, {1, 1.3}}, Line{{1.1, 1.5}, {1.1, 3}}});
  const OccupancyGrid raw = rasterize(doc, 0.05);
  const OccupancyGrid dil = thicken_and_close(raw, 3, 0);
  const OccupancyGrid closed = thicken_and_close(raw, 3, 4);
  const int pad = 4;
  const Mask inner = closed.cells.block(pad, pad, dil.height(), dil.width());
  CHECK(((dil.cells != 0) <= (inner != 0)).all());
}

TEST_CASE("door gaps wider than the closing diameter survive") {
  // Rectangle split by an inner wall with a 6 px (0.3 m) doorway.
  const CadDocument doc =
      meters({rect(0, 0, 4, 2), Line{{2, 0}, {2, 0.8}}, Line{{2, 1.1}, {2, 2}}});
  const OccupancyGrid g = thicken_and_close(rasterize(doc, 0.05), 1, 1);
  const FreeSpace fs = free_space_components(g);
  CHECK(fs.interior_count == 1);

  const OccupancyGrid sealed = thicken_and_close(rasterize(doc, 0.05), 1, 5);
  CHECK(free_space_components(sealed).interior_count == 2);
}

TEST_CASE("free space components") {
  SUBCASE("closed rectangle") {
    const FreeSpace fs = free_space_components(thicken_and_close(rasterize(meters({rect(0, 0, 3, 2)}), 0.05), 3, 4));
    CHECK(fs.interior_count == 1);
    CHECK(fs.labels(0, 0) == 0);
  }
  SUBCASE("two sealed rooms sharing a wall") {
    const OccupancyGrid g =
        thicken_and_close(rasterize(meters({rect(0, 0, 6, 3), Line{{3, 0}, {3, 3}}}), 0.05), 3, 4);
    CHECK(free_space_components(g).interior_count == 2);
  }
  SUBCASE("unsealed scribble") {
    const OccupancyGrid g = thicken_and_close(rasterize(meters({Line{{0, 0}, {3, 1}}, Line{{3, 1}, {0, 2}}}), 0.05), 3, 4);
    CHECK_THROWS_AS(free_space_components(g), NoInteriorSpace);
  }
}

TEST_CASE("PGM output") {
  const OccupancyGrid g = rasterize(meters({Line{{0, 0}, {1, 0}}}), 0.05);
  const std::string pgm = write_pgm(g);
  const std::string header = "P5\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  REQUIRE(pgm.rfind(header, 0) == 0);
  REQUIRE(pgm.size() == header.size() + std::size_t(g.width()) * g.height());
  // North up: the last grid row is the first image row.
  for (int col = 0; col < g.width(); ++col) {
    const auto top = static_cast<unsigned char>(pgm[header.size() + col]);
    CHECK(top == (g.occupied(g.height() - 1, col) ? 0 : 255));
  }
}
