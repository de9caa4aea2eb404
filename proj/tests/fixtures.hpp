#pragma once

// Synthetic floor plans with known answers. Rooms are axis-aligned
// rectangles on wall centerlines; walls are drawn as closed outlines of the
// given thickness with door openings cut where two rooms are connected.

#include "cad2osm/cad.hpp"
#include "cad2osm/osm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fixtures {

using cad2osm::Point2d;
using cad2osm::Ring2d;

struct Rect {
  double x0, y0, x1, y1;  // meters, wall centerlines
};

struct DoorSpec {
  int a, b;                   // room indices
  std::optional<double> at;   // opening center along the shared wall, else its middle
};

/// A free-standing wall segment (centerline, meters), e.g. a constriction
/// inside a room.
struct Stub {
  Point2d from, to;
};

struct Layout {
  std::string name;
  std::vector<Rect> rooms;
  std::vector<std::string> names;  // one per room; empty means unlabeled
  std::vector<DoorSpec> doors;
  std::vector<Stub> stubs;
  std::string wall_layer = "A-WALL";
  std::string text_layer = "A-ANNO";
  double wall_thickness = 0.2;
  double door_width = 0.9;
};

struct Opening {
  int a, b;
  Point2d p0, p1;  // on the wall centerline
};

std::vector<Opening> openings(const Layout& layout);

/// Drawing in millimetres with $INSUNITS = 4.
cad2osm::CadDocument make_document(const Layout& layout);
std::string make_dxf(const Layout& layout);

/// Room interiors (rectangle shrunk by half the wall thickness) with their
/// names, and one passage per door across the opening, from/to by way id.
cad2osm::OsmMap ground_truth(const Layout& layout, const cad2osm::GeoOrigin& origin, int level = 0);

Ring2d interior(const Layout& layout, int room);

Layout two_rooms();
Layout three_room_path();
/// Three rows of three 4 m rooms above a 12 x 2 m corridor; the bottom row
/// opens onto the corridor, the upper rows open to the room below.
Layout grid_with_corridor();
/// Walls on an Italian-named layer "Muri"; the long hall is pinched by two
/// wall stubs so it is segmented into two halves.
Layout italian_muri();
/// Two floors with a stair room at the same place.
Layout floor_with_stair(int level);
/// Recursive splits of a rectangle; doors along a spanning tree of the room
/// adjacency.
Layout random_bsp(unsigned seed);

std::vector<Layout> oracle_fixtures();

inline cad2osm::GeoOrigin test_origin() { return {31.0, 121.0, 0.0}; }

}  // namespace fixtures
