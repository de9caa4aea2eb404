#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace fixtures {
namespace {

using cad2osm::CadDocument;
using cad2osm::OsmId;
using cad2osm::OsmMap;

constexpr double kMm = 1000.0;

struct Interval {
  double lo, hi;
};

// Wall lines keyed by (vertical?, coordinate in micrometres).
using LineKey = std::pair<bool, long long>;

long long key_of(double c) { return std::llround(c * 1e6); }

void add_interval(std::vector<Interval>& v, Interval iv) {
  v.push_back(iv);
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const auto& i : v) {
    if (!merged.empty() && i.lo <= merged.back().hi + 1e-9)
      merged.back().hi = std::max(merged.back().hi, i.hi);
    else
      merged.push_back(i);
  }
  v = std::move(merged);
}

std::vector<Interval> subtract(const std::vector<Interval>& v, const std::vector<Interval>& cuts) {
  std::vector<Interval> out = v;
  for (const auto& c : cuts) {
    std::vector<Interval> next;
    for (const auto& i : out) {
      if (c.hi <= i.lo || c.lo >= i.hi) {
        next.push_back(i);
        continue;
      }
      if (c.lo > i.lo) next.push_back({i.lo, c.lo});
      if (c.hi < i.hi) next.push_back({c.hi, i.hi});
    }
    out = std::move(next);
  }
  return out;
}

/// Shared wall of two rectangles: (vertical?, coordinate, overlap).
std::optional<std::tuple<bool, double, Interval>> shared_wall(const Rect& a, const Rect& b) {
  auto overlap = [](double a0, double a1, double b0, double b1) -> std::optional<Interval> {
    const double lo = std::max(a0, b0), hi = std::min(a1, b1);
    if (hi - lo <= 1e-9) return std::nullopt;
    return Interval{lo, hi};
  };
  auto same = [](double u, double v) { return std::abs(u - v) < 1e-9; };
  if (same(a.x1, b.x0) || same(a.x0, b.x1)) {
    const double x = same(a.x1, b.x0) ? a.x1 : a.x0;
    if (auto o = overlap(a.y0, a.y1, b.y0, b.y1)) return std::make_tuple(true, x, *o);
  }
  if (same(a.y1, b.y0) || same(a.y0, b.y1)) {
    const double y = same(a.y1, b.y0) ? a.y1 : a.y0;
    if (auto o = overlap(a.x0, a.x1, b.x0, b.x1)) return std::make_tuple(false, y, *o);
  }
  return std::nullopt;
}

Point2d on_line(bool vertical, double c, double t) { return vertical ? Point2d(c, t) : Point2d(t, c); }

cad2osm::Polyline outline(const Point2d& from, const Point2d& to, double thickness) {
  const Point2d d = (to - from).normalized();
  const Point2d n(-d.y(), d.x());
  const double h = thickness / 2.0;
  cad2osm::Polyline pl;
  pl.closed = true;
  for (const Point2d& p : {Point2d(from - n * h), Point2d(to - n * h), Point2d(to + n * h), Point2d(from + n * h)})
    pl.vertices.push_back(p * kMm);
  return pl;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

std::vector<Opening> openings(const Layout& layout) {
  std::vector<Opening> out;
  for (const auto& d : layout.doors) {
    const auto wall = shared_wall(layout.rooms[d.a], layout.rooms[d.b]);
    if (!wall) continue;
    const auto& [vertical, c, span] = *wall;
    const double mid = d.at ? *d.at : (span.lo + span.hi) / 2.0;
    const double h = layout.door_width / 2.0;
    out.push_back({d.a, d.b, on_line(vertical, c, mid - h), on_line(vertical, c, mid + h)});
  }
  return out;
}

CadDocument make_document(const Layout& layout) {
  std::map<LineKey, std::vector<Interval>> lines;
  for (const auto& r : layout.rooms) {
    add_interval(lines[{false, key_of(r.y0)}], {r.x0, r.x1});
    add_interval(lines[{false, key_of(r.y1)}], {r.x0, r.x1});
    add_interval(lines[{true, key_of(r.x0)}], {r.y0, r.y1});
    add_interval(lines[{true, key_of(r.x1)}], {r.y0, r.y1});
  }
  std::map<LineKey, std::vector<Interval>> cuts;
  for (const auto& o : openings(layout)) {
    const bool vertical = std::abs(o.p0.x() - o.p1.x()) < 1e-9;
    const double c = vertical ? o.p0.x() : o.p0.y();
    const double a = vertical ? o.p0.y() : o.p0.x();
    const double b = vertical ? o.p1.y() : o.p1.x();
    cuts[{vertical, key_of(c)}].push_back({std::min(a, b), std::max(a, b)});
  }

  CadDocument doc;
  doc.drawing_unit_scale = 0.001;
  auto& walls = doc.layers[layout.wall_layer];
  const double h = layout.wall_thickness / 2.0;
  for (const auto& [key, intervals] : lines) {
    const bool vertical = key.first;
    const double c = double(key.second) / 1e6;
    const auto& cut = cuts[key];
    auto is_jamb = [&](double t) {
      return std::any_of(cut.begin(), cut.end(),
                         [&](const Interval& i) { return std::abs(i.lo - t) < 1e-9 || std::abs(i.hi - t) < 1e-9; });
    };
    for (const auto& iv : subtract(intervals, cut)) {
      const double lo = is_jamb(iv.lo) ? iv.lo : iv.lo - h;
      const double hi = is_jamb(iv.hi) ? iv.hi : iv.hi + h;
      walls.push_back(outline(on_line(vertical, c, lo), on_line(vertical, c, hi), layout.wall_thickness));
    }
  }
  for (const auto& s : layout.stubs) {
    const Point2d d = (s.to - s.from).normalized();
    walls.push_back(outline(s.from - d * h, s.to, layout.wall_thickness));
  }

  auto& texts = doc.layers[layout.text_layer];
  for (std::size_t i = 0; i < layout.rooms.size(); ++i) {
    if (i >= layout.names.size() || layout.names[i].empty()) continue;
    const auto& r = layout.rooms[i];
    cad2osm::Text t;
    t.anchor = Point2d((r.x0 + r.x1) / 2.0 - 0.5, (r.y0 + r.y1) / 2.0) * kMm;
    t.content = layout.names[i];
    t.height = 250.0;
    texts.push_back(t);
  }
  if (texts.empty()) doc.layers.erase(layout.text_layer);
  doc.recompute_extents();
  return doc;
}

std::string make_dxf(const Layout& layout) { return cad2osm::write_dxf(make_document(layout)); }

Ring2d interior(const Layout& layout, int room) {
  const auto& r = layout.rooms[room];
  const double h = layout.wall_thickness / 2.0;
  return {{r.x0 + h, r.y0 + h}, {r.x1 - h, r.y0 + h}, {r.x1 - h, r.y1 - h}, {r.x0 + h, r.y1 - h}};
}

OsmMap ground_truth(const Layout& layout, const cad2osm::GeoOrigin& origin, int level) {
  OsmMap map;
  map.origin = origin;
  OsmId next = -1;
  auto add_node = [&](const Point2d& p) {
    const auto ll = cad2osm::cartesian_to_latlon(p, origin);
    map.nodes.push_back({next, cad2osm::quantize7(ll.lat), cad2osm::quantize7(ll.lon), {}});
    return next--;
  };
  const std::string lvl = std::to_string(level);
  std::vector<OsmId> way_of(layout.rooms.size());
  for (std::size_t i = 0; i < layout.rooms.size(); ++i) {
    cad2osm::OsmWay w;
    for (const auto& p : interior(layout, int(i))) w.node_refs.push_back(add_node(p));
    w.node_refs.push_back(w.node_refs.front());
    w.id = next--;
    w.tags = {{"indoor", "room"}, {"osmAG:type", "area"}, {"osmAG:areaType", "room"}, {"level", lvl}};
    if (i < layout.names.size() && !layout.names[i].empty()) w.tags["name"] = layout.names[i];
    way_of[i] = w.id;
    map.ways.push_back(std::move(w));
  }
  for (const auto& o : openings(layout)) {
    cad2osm::OsmWay w;
    w.node_refs = {add_node(o.p0), add_node(o.p1)};
    w.id = next--;
    w.tags = {{"osmAG:type", "passage"},
              {"indoor", "door"},
              {"level", lvl},
              {"osmAG:from", std::to_string(way_of[o.a])},
              {"osmAG:to", std::to_string(way_of[o.b])}};
    map.ways.push_back(std::move(w));
  }
  return map;
}

Layout two_rooms() {
  Layout l;
  l.name = "two_rooms";
  l.rooms = {{0, 0, 4, 4}, {4, 0, 8, 4}};
  l.names = {"Office 101", "Office 102"};
  l.doors = {{0, 1, std::nullopt}};
  return l;
}

Layout three_room_path() {
  Layout l;
  l.name = "three_room_path";
  l.rooms = {{0, 0, 4, 5}, {4, 0, 9, 5}, {9, 0, 13, 5}};
  l.names = {"Lab A", "Meeting Room", "Lab B"};
  l.doors = {{0, 1, 1.5}, {1, 2, 3.5}};
  return l;
}

Layout grid_with_corridor() {
  Layout l;
  l.name = "grid_with_corridor";
  l.rooms.push_back({0, 0, 12, 2});
  l.names.push_back("Corridor");
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) {
      l.rooms.push_back({4.0 * col, 2.0 + 4.0 * row, 4.0 * (col + 1), 6.0 + 4.0 * row});
      l.names.push_back("Room " + std::to_string(row + 1) + "0" + std::to_string(col + 1));
    }
  for (int col = 0; col < 3; ++col) {
    l.doors.push_back({0, 1 + col, std::nullopt});
    for (int row = 1; row < 3; ++row) l.doors.push_back({1 + 3 * (row - 1) + col, 1 + 3 * row + col, std::nullopt});
  }
  return l;
}

Layout italian_muri() {
  Layout l;
  l.name = "italian_muri";
  l.wall_layer = "Muri";
  l.text_layer = "Testi";
  l.rooms = {{0, 0, 12, 4}, {0, 4, 6, 8}, {6, 4, 12, 8}};
  l.names = {"Sala", "Ufficio 1", "Ufficio 2"};
  l.doors = {{0, 1, 3.0}, {0, 2, 9.0}};
  // Two stubs pinch the hall at x = 6, leaving a 1.2 m gap around y = 2.
  l.stubs = {{{6.0, 0.0}, {6.0, 1.4}}, {{6.0, 4.0}, {6.0, 2.6}}};
  return l;
}

Layout floor_with_stair(int level) {
  Layout l;
  l.name = "floor_" + std::to_string(level);
  l.rooms = {{0, 0, 5, 5}, {5, 0, 10, 5}, {10, 0, 13, 5}};
  l.names = {"Room " + std::to_string(level) + "01", "Room " + std::to_string(level) + "02", "STAIR A"};
  l.doors = {{0, 1, std::nullopt}, {1, 2, std::nullopt}};
  return l;
}

Layout random_bsp(unsigned seed) {
  std::mt19937 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  Layout l;
  l.name = "bsp_" + std::to_string(seed);
  const double w = round_to(uniform(8.0, 14.0), 0.1);
  const double h = round_to(uniform(6.0, 11.0), 0.1);

  constexpr double kMinSide = 3.0;
  std::vector<Rect> pending{{0, 0, w, h}};
  while (!pending.empty()) {
    const Rect r = pending.back();
    pending.pop_back();
    const double rw = r.x1 - r.x0, rh = r.y1 - r.y0;
    const bool can_x = rw >= 2 * kMinSide, can_y = rh >= 2 * kMinSide;
    const bool stop = (!can_x && !can_y) || (rw * rh < 30.0 && uniform(0, 1) < 0.4);
    if (stop) {
      l.rooms.push_back(r);
      continue;
    }
    const bool split_x = can_x && (!can_y || rw >= rh);
    if (split_x) {
      const double x = round_to(uniform(r.x0 + kMinSide, r.x1 - kMinSide), 0.1);
      pending.push_back({r.x0, r.y0, x, r.y1});
      pending.push_back({x, r.y0, r.x1, r.y1});
    } else {
      const double y = round_to(uniform(r.y0 + kMinSide, r.y1 - kMinSide), 0.1);
      pending.push_back({r.x0, r.y0, r.x1, y});
      pending.push_back({r.x0, y, r.x1, r.y1});
    }
  }

  // Random spanning tree over walls long enough for a door away from the corners.
  struct Edge {
    int a, b;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < int(l.rooms.size()); ++i)
    for (int j = i + 1; j < int(l.rooms.size()); ++j)
      if (auto wall = shared_wall(l.rooms[i], l.rooms[j])) {
        const Interval span = std::get<2>(*wall);
        if (span.hi - span.lo >= 2.0) edges.push_back({i, j});
      }
  std::shuffle(edges.begin(), edges.end(), rng);
  std::vector<int> parent(l.rooms.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges)
    if (find(e.a) != find(e.b)) {
      parent[find(e.a)] = find(e.b);
      l.doors.push_back({e.a, e.b, std::nullopt});
    }
  for (std::size_t i = 0; i < l.rooms.size(); ++i) l.names.push_back("R" + std::to_string(i + 1));
  return l;
}

std::vector<Layout> oracle_fixtures() { return {two_rooms(), three_room_path(), grid_with_corridor()}; }

}  // namespace fixtures
