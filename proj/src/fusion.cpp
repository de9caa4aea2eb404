#include "cad2osm/fusion.hpp"

#include "cad2osm/boolean.hpp"
#include "cad2osm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace cad2osm {
namespace {

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

struct Candidate {
  OsmArea area;
  Point2d center;
  bool elevator = false;
};

std::vector<Candidate> vertical_candidates(const FloorSpec& floor) {
  std::vector<Candidate> out;
  for (auto& a : room_areas(floor.map)) {
    const std::string type = a.tags.count("osmAG:areaType") ? a.tags.at("osmAG:areaType") : "";
    const std::string name = a.tags.count("name") ? upper(a.tags.at("name")) : "";
    bool hit = type == "stairs" || type == "elevator";
    bool elevator = type == "elevator";
    for (const auto& kw : floor.stair_keywords) {
      const std::string k = upper(kw);
      if (!k.empty() && name.find(k) != std::string::npos) {
        hit = true;
        if (k.find("ELEV") != std::string::npos || k.find("LIFT") != std::string::npos) elevator = true;
      }
    }
    if (!hit) continue;
    Candidate c;
    c.center = centroid(a.polygon);
    c.elevator = elevator;
    c.area = std::move(a);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<VerticalLink> detect_vertical_links(const FloorSpec& floor_i, const FloorSpec& floor_j,
                                                const FusionParams& params) {
  if (std::abs(floor_i.level - floor_j.level) != 1)
    throw ManifestError("vertical links need adjacent levels");
  const auto ci = vertical_candidates(floor_i);
  const auto cj = vertical_candidates(floor_j);
  struct Pair {
    std::size_t i, j;
    double iou, dist;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < ci.size(); ++i)
    for (std::size_t j = 0; j < cj.size(); ++j) {
      const double o = iou(ci[i].area.polygon, cj[j].area.polygon);
      const double d = (ci[i].center - cj[j].center).norm();
      if (o >= params.min_iou || d <= params.max_centroid_distance) pairs.push_back({i, j, o, d});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.iou > b.iou || (a.iou == b.iou && a.dist < b.dist);
  });
  std::vector<char> used_i(ci.size(), 0), used_j(cj.size(), 0);
  std::vector<VerticalLink> links;
  for (const auto& p : pairs) {
    if (used_i[p.i] || used_j[p.j]) continue;
    used_i[p.i] = used_j[p.j] = 1;
    VerticalLink link;
    link.area_i = ci[p.i].area.way_id;
    link.area_j = cj[p.j].area.way_id;
    link.level_i = floor_i.level;
    link.level_j = floor_j.level;
    link.centroid_i = ci[p.i].center;
    link.centroid_j = cj[p.j].center;
    link.elevator = ci[p.i].elevator || cj[p.j].elevator;
    links.push_back(link);
  }
  return links;
}

FusionResult fuse_floors(const std::vector<FloorSpec>& input, const FusionParams& params) {
  if (input.size() < 2) throw ManifestError("fusion needs at least two floors");
  std::vector<FloorSpec> floors = input;
  std::stable_sort(floors.begin(), floors.end(),
                   [](const FloorSpec& a, const FloorSpec& b) { return a.level < b.level; });
  const GeoOrigin origin = floors.front().map.origin;
  for (std::size_t k = 0; k < floors.size(); ++k) {
    const GeoOrigin& o = floors[k].map.origin;
    if (fixed7(o.lat0) != fixed7(origin.lat0) || fixed7(o.lon0) != fixed7(origin.lon0) ||
        fixed7(o.rotation) != fixed7(origin.rotation))
      throw OriginMismatch("floor at level " + std::to_string(floors[k].level) +
                           " uses a different geo origin");
    if (k > 0 && floors[k].level == floors[k - 1].level)
      throw DuplicateLevel("level " + std::to_string(floors[k].level) + " appears twice");
  }

  FusionResult result;
  OsmMap& out = result.map;
  out.origin = origin;

  // Vertical links between consecutive levels.
  for (std::size_t k = 0; k + 1 < floors.size(); ++k) {
    if (floors[k + 1].level - floors[k].level != 1) {
      result.warnings.push_back("levels " + std::to_string(floors[k].level) + " and " +
                                std::to_string(floors[k + 1].level) + " are not adjacent");
      continue;
    }
    for (const auto& l : detect_vertical_links(floors[k], floors[k + 1], params)) result.links.push_back(l);
  }
  if (result.links.empty()) result.warnings.push_back("no vertical passages detected");

  // Node ids: every floor's nodes in order, then vertical-link centroids.
  OsmId next_node = -1;
  std::vector<std::map<OsmId, OsmId>> node_map(floors.size());
  std::vector<std::map<OsmId, Point2d>> node_world(floors.size());
  for (std::size_t k = 0; k < floors.size(); ++k)
    for (const auto& n : floors[k].map.nodes) {
      OsmNode copy = n;
      copy.id = next_node--;
      node_map[k][n.id] = copy.id;
      node_world[k][copy.id] = latlon_to_cartesian({n.lat, n.lon}, origin);
      out.nodes.push_back(std::move(copy));
    }

  // Way ids: building, level areas, floor contents, vertical passages.
  OsmId next_way = next_node - static_cast<OsmId>(2 * result.links.size());
  const OsmId building_id = next_way--;
  std::vector<OsmId> level_id(floors.size());
  for (auto& id : level_id) id = next_way--;

  std::vector<std::map<OsmId, OsmId>> way_map(floors.size());
  for (std::size_t k = 0; k < floors.size(); ++k)
    for (const auto& w : floors[k].map.ways) way_map[k][w.id] = next_way--;

  // Footprints reuse the hull's room nodes so no position is emitted twice.
  auto hull_refs = [](const std::map<OsmId, Point2d>& pts, const std::set<OsmId>& ids) {
    std::vector<Point2d> p;
    for (OsmId id : ids) p.push_back(pts.at(id));
    const Ring2d hull = convex_hull(p);
    std::vector<OsmId> refs;
    for (const auto& h : hull)
      for (OsmId id : ids)
        if (pts.at(id) == h) {
          refs.push_back(id);
          break;
        }
    if (!refs.empty()) refs.push_back(refs.front());
    return refs;
  };
  std::map<OsmId, Point2d> all_points;
  std::set<OsmId> footprint_nodes;
  std::vector<OsmWay> level_ways;
  for (std::size_t k = 0; k < floors.size(); ++k) {
    std::set<OsmId> room_nodes;
    for (const auto& w : floors[k].map.ways)
      if (w.tag("osmAG:type") == "area")
        for (OsmId r : w.node_refs) room_nodes.insert(node_map[k].at(r));
    OsmWay lw;
    lw.id = level_id[k];
    lw.node_refs = hull_refs(node_world[k], room_nodes);
    if (lw.node_refs.size() < 4)
      throw ManifestError("level " + std::to_string(floors[k].level) + " has no room geometry");
    const std::string level = std::to_string(floors[k].level);
    lw.tags = {{"indoor", "level"},
               {"osmAG:type", "area"},
               {"level", level},
               {"osmAG:parent", std::to_string(building_id)},
               {"name", "Level " + level}};
    if (floors[k].elevation_m != 0.0) lw.tags["ele"] = std::to_string(floors[k].elevation_m);
    for (OsmId r : lw.node_refs) {
      footprint_nodes.insert(r);
      all_points[r] = node_world[k].at(r);
    }
    level_ways.push_back(std::move(lw));
  }
  OsmWay building;
  building.id = building_id;
  building.node_refs = hull_refs(all_points, footprint_nodes);
  building.tags = {{"osmAG:type", "structure"}, {"building", "yes"}, {"name", "Building"}};
  out.ways.push_back(std::move(building));
  for (auto& lw : level_ways) out.ways.push_back(std::move(lw));

  for (std::size_t k = 0; k < floors.size(); ++k) {
    const std::string level = std::to_string(floors[k].level);
    for (const auto& w : floors[k].map.ways) {
      OsmWay copy = w;
      copy.id = way_map[k].at(w.id);
      for (auto& r : copy.node_refs) r = node_map[k].at(r);
      copy.tags["level"] = level;
      copy.tags["osmAG:parent"] = std::to_string(level_id[k]);
      for (const char* key : {"osmAG:from", "osmAG:to"}) {
        auto it = copy.tags.find(key);
        if (it == copy.tags.end()) continue;
        try {
          std::size_t used = 0;
          const long long old = std::stoll(it->second, &used);
          auto m = way_map[k].find(old);
          if (used == it->second.size() && m != way_map[k].end()) it->second = std::to_string(m->second);
        } catch (const std::exception&) {
        }
      }
      out.ways.push_back(std::move(copy));
    }
  }

  auto floor_index = [&](int level) {
    for (std::size_t k = 0; k < floors.size(); ++k)
      if (floors[k].level == level) return k;
    return floors.size();
  };
  for (const auto& link : result.links) {
    const std::size_t ki = floor_index(link.level_i);
    const std::size_t kj = floor_index(link.level_j);
    OsmWay w;
    for (const Point2d& c : {link.centroid_i, link.centroid_j}) {
      const LatLon ll = cartesian_to_latlon(c, origin);
      OsmNode n;
      n.id = next_node--;
      n.lat = quantize7(ll.lat);
      n.lon = quantize7(ll.lon);
      w.node_refs.push_back(n.id);
      out.nodes.push_back(n);
    }
    w.id = next_way--;
    w.tags = {{"osmAG:type", "passage"},
              {"indoor", link.elevator ? "elevator" : "stairs"},
              {"level", std::to_string(link.level_i) + ";" + std::to_string(link.level_j)},
              {"osmAG:from", std::to_string(way_map[ki].at(link.area_i))},
              {"osmAG:to", std::to_string(way_map[kj].at(link.area_j))},
              {"osmAG:parent", std::to_string(building_id)}};
    out.ways.push_back(std::move(w));
  }
  return result;
}

HierarchyReport validate_hierarchy(const OsmMap& map) {
  HierarchyReport report;
  std::map<OsmId, const OsmWay*> by_id;
  for (const auto& w : map.ways) by_id[w.id] = &w;
  std::vector<OsmId> roots;
  for (const auto& w : map.ways)
    if (w.tag("osmAG:type") == "structure") roots.push_back(w.id);
  if (roots.size() != 1)
    report.violations.push_back("expected exactly one building root, found " + std::to_string(roots.size()));
  for (OsmId r : roots)
    if (!by_id[r]->tag("osmAG:parent").empty())
      report.violations.push_back("building " + std::to_string(r) + " has a parent");

  auto parent_of = [&](const OsmWay& w) -> std::optional<OsmId> {
    const std::string p = w.tag("osmAG:parent");
    if (p.empty()) return std::nullopt;
    try {
      return static_cast<OsmId>(std::stoll(p));
    } catch (const std::exception&) {
      return OsmId{0};
    }
  };
  for (const auto& w : map.ways) {
    const std::string tag = "way " + std::to_string(w.id);
    const std::string indoor = w.tag("indoor");
    const bool room = w.tag("osmAG:type") == "area" && (indoor == "room" || indoor == "corridor");
    const auto p = parent_of(w);
    if (!p) {
      if (room) report.violations.push_back(tag + ": room without osmAG:parent");
      continue;
    }
    if (!by_id.count(*p)) {
      report.violations.push_back(tag + ": dangling parent " + w.tag("osmAG:parent"));
      continue;
    }
    // Walk up; a revisit is a cycle, a parentless non-structure end is an orphan.
    std::set<OsmId> seen{w.id};
    const OsmWay* cur = by_id[*p];
    while (true) {
      if (!seen.insert(cur->id).second) {
        report.violations.push_back(tag + ": parent cycle through way " + std::to_string(cur->id));
        break;
      }
      const auto up = parent_of(*cur);
      if (!up) {
        if (cur->tag("osmAG:type") != "structure")
          report.violations.push_back(tag + ": hierarchy ends at non-structure way " +
                                      std::to_string(cur->id));
        break;
      }
      auto it = by_id.find(*up);
      if (it == by_id.end()) break;  // reported on that way itself
      cur = it->second;
    }
  }
  return report;
}

bool room_graph_connected(const OsmMap& map) {
  const auto rooms = room_areas(map);
  if (rooms.size() <= 1) return true;
  std::map<OsmId, std::vector<OsmId>> adj;
  for (const auto& w : map.ways) {
    if (w.tag("osmAG:type") != "passage") continue;
    if (auto pr = passage_rooms(map, w)) {
      adj[pr->first].push_back(pr->second);
      adj[pr->second].push_back(pr->first);
    }
  }
  std::set<OsmId> seen{rooms.front().way_id};
  std::vector<OsmId> stack{rooms.front().way_id};
  while (!stack.empty()) {
    const OsmId v = stack.back();
    stack.pop_back();
    for (OsmId u : adj[v])
      if (seen.insert(u).second) stack.push_back(u);
  }
  return seen.size() == rooms.size();
}

}  // namespace cad2osm
