#include "cad2osm/osm.hpp"

#include "cad2osm/errors.hpp"
#include "cad2osm/refine.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace cad2osm {
namespace {

constexpr double kDeg = 180.0 / kPi;
constexpr double kMaxRange = 50000.0;

std::string format7(double degrees) {
  const std::int64_t k = fixed7(degrees);
  const std::uint64_t a = k < 0 ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%" PRIu64 ".%07" PRIu64, k < 0 ? "-" : "", a / 10000000u,
                a % 10000000u);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_tags(std::ostringstream& out, const Tags& tags, const char* indent) {
  for (const auto& [k, v] : tags)
    out << indent << "<tag k=\"" << escape(k) << "\" v=\"" << escape(v) << "\"/>\n";
}

OsmId parse_id(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw MalformedXml(std::string("bad ") + what + " '" + s + "'");
  }
}

double parse_degrees(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return quantize7(v);
  } catch (const std::exception&) {
    throw MalformedXml(std::string("bad ") + what + " '" + s + "'");
  }
}

bool is_room_way(const OsmWay& w) {
  const std::string indoor = w.tag("indoor");
  return w.tag("osmAG:type") == "area" && (indoor == "room" || indoor == "corridor");
}

}  // namespace

void GeoOrigin::validate() const {
  if (!std::isfinite(lat0) || std::abs(lat0) > 85.0)
    throw UnsupportedLatitude("origin latitude " + std::to_string(lat0) + " beyond +/-85 degrees");
  if (!std::isfinite(lon0) || std::abs(lon0) > 180.0)
    throw ConfigError("origin longitude " + std::to_string(lon0) + " outside [-180, 180]");
  if (!std::isfinite(rotation)) throw ConfigError("origin rotation must be finite");
}

LatLon cartesian_to_latlon(const Point2d& p, const GeoOrigin& origin) {
  origin.validate();
  if (!(p.norm() < kMaxRange))
    throw ConfigError("point " + std::to_string(p.norm()) + " m from the origin exceeds 50 km");
  const double th = origin.rotation / kDeg;
  const double east = p.x() * std::cos(th) + p.y() * std::sin(th);
  const double north = -p.x() * std::sin(th) + p.y() * std::cos(th);
  return {origin.lat0 + north / kEarthRadius * kDeg,
          origin.lon0 + east / (kEarthRadius * std::cos(origin.lat0 / kDeg)) * kDeg};
}

Point2d latlon_to_cartesian(const LatLon& ll, const GeoOrigin& origin) {
  origin.validate();
  const double th = origin.rotation / kDeg;
  const double north = (ll.lat - origin.lat0) / kDeg * kEarthRadius;
  const double east = (ll.lon - origin.lon0) / kDeg * kEarthRadius * std::cos(origin.lat0 / kDeg);
  return {east * std::cos(th) - north * std::sin(th), east * std::sin(th) + north * std::cos(th)};
}

std::int64_t fixed7(double degrees) { return std::llround(degrees * 1e7); }
double quantize7(double degrees) { return static_cast<double>(fixed7(degrees)) / 1e7; }

OsmBounds OsmMap::bounds() const {
  OsmBounds b;
  if (nodes.empty()) return b;
  b.minlat = b.maxlat = nodes.front().lat;
  b.minlon = b.maxlon = nodes.front().lon;
  for (const auto& n : nodes) {
    b.minlat = std::min(b.minlat, n.lat);
    b.maxlat = std::max(b.maxlat, n.lat);
    b.minlon = std::min(b.minlon, n.lon);
    b.maxlon = std::max(b.maxlon, n.lon);
  }
  return b;
}

std::unordered_map<OsmId, std::size_t> OsmMap::node_index() const {
  std::unordered_map<OsmId, std::size_t> idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) idx.emplace(nodes[i].id, i);
  return idx;
}

const OsmWay* OsmMap::find_way(OsmId id) const {
  for (const auto& w : ways)
    if (w.id == id) return &w;
  return nullptr;
}

OsmWay* OsmMap::find_way(OsmId id) {
  for (auto& w : ways)
    if (w.id == id) return &w;
  return nullptr;
}

OsmMap serialize_area_graph(const AreaGraph& graph, const GeoOrigin& origin, int level) {
  origin.validate();
  const double res = graph.transform.resolution;
  InvariantOptions opt;
  opt.resolution = res;
  const auto violations = check_area_graph(graph, opt);
  if (!violations.empty()) {
    std::string msg = "refusing to serialize:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw SerializationRefused(msg);
  }

  OsmMap map;
  map.origin = origin;
  OsmId next = -1;
  std::map<std::pair<std::int64_t, std::int64_t>, OsmId> node_of;
  auto node_for = [&](const Point2d& p) {
    const LatLon ll = cartesian_to_latlon(p, origin);
    const auto key = std::make_pair(fixed7(ll.lat), fixed7(ll.lon));
    auto it = node_of.find(key);
    if (it != node_of.end()) return it->second;
    OsmNode node;
    node.id = next--;
    node.lat = static_cast<double>(key.first) / 1e7;
    node.lon = static_cast<double>(key.second) / 1e7;
    map.nodes.push_back(node);
    node_of.emplace(key, node.id);
    return node.id;
  };
  const std::string level_tag = std::to_string(level);

  std::map<int, OsmId> way_of_room;
  for (const auto& room : graph.rooms) {
    Ring2d ring = room.polygon;
    insert_boundary_points(ring, passage_endpoints(graph, room.id), 2.0 * res);
    std::vector<OsmId> refs;
    for (const auto& p : ring) {
      const OsmId id = node_for(p);
      if (refs.empty() || refs.back() != id) refs.push_back(id);
    }
    while (refs.size() > 1 && refs.front() == refs.back()) refs.pop_back();
    if (std::set<OsmId>(refs.begin(), refs.end()).size() < 3)
      throw SerializationRefused("room " + std::to_string(room.id) +
                                 " collapses below 3 nodes at 7-decimal precision");
    refs.push_back(refs.front());
    OsmWay way;
    way.id = next--;
    way.node_refs = std::move(refs);
    way.tags = {{"indoor", "room"},
                {"osmAG:type", "area"},
                {"level", level_tag},
                {"osmAG:areaType", "room"}};
    for (const auto& [k, v] : room.tags) way.tags[k] = v;
    way_of_room[room.id] = way.id;
    map.ways.push_back(std::move(way));
  }

  auto label_of = [&](int room_id) {
    const RoomArea* r = graph.find_room(room_id);
    if (r) {
      auto it = r->tags.find("name");
      if (it != r->tags.end() && !it->second.empty()) return it->second;
    }
    return std::to_string(way_of_room.at(room_id));
  };
  for (const auto& p : graph.passages) {
    const OsmId a = node_for(p.endpoints[0]);
    const OsmId b = node_for(p.endpoints[1]);
    if (a == b)
      throw SerializationRefused("passage " + std::to_string(p.id) +
                                 " has coincident endpoints at 7-decimal precision");
    OsmWay way;
    way.id = next--;
    way.node_refs = {a, b};
    way.tags = {{"osmAG:type", "passage"},
                {"indoor", "door"},
                {"level", level_tag},
                {"osmAG:from", label_of(p.room_a)},
                {"osmAG:to", label_of(p.room_b)}};
    map.ways.push_back(std::move(way));
  }
  return map;
}

std::string write_osm_xml(const OsmMap& map) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<osm version=\"0.6\" generator=\"cad2osm\" origin_lat=\"" << format7(map.origin.lat0)
      << "\" origin_lon=\"" << format7(map.origin.lon0) << "\" origin_rotation=\""
      << format7(map.origin.rotation) << "\">\n";
  const OsmBounds b = map.bounds();
  out << "  <bounds minlat=\"" << format7(b.minlat) << "\" minlon=\"" << format7(b.minlon)
      << "\" maxlat=\"" << format7(b.maxlat) << "\" maxlon=\"" << format7(b.maxlon) << "\"/>\n";
  for (const auto& n : map.nodes) {
    out << "  <node id=\"" << n.id << "\" lat=\"" << format7(n.lat) << "\" lon=\"" << format7(n.lon)
        << "\"";
    if (n.tags.empty()) {
      out << "/>\n";
    } else {
      out << ">\n";
      write_tags(out, n.tags, "    ");
      out << "  </node>\n";
    }
  }
  for (const auto& w : map.ways) {
    out << "  <way id=\"" << w.id << "\">\n";
    for (OsmId r : w.node_refs) out << "    <nd ref=\"" << r << "\"/>\n";
    write_tags(out, w.tags, "    ");
    out << "  </way>\n";
  }
  out << "</osm>\n";
  return out.str();
}

OsmMap read_osm_xml(std::string_view bytes) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedXml(std::string("malformed OSM XML: ") + e.what());
  }
  const auto root = tree.get_child_optional("osm");
  if (!root) throw MalformedXml("missing <osm> root element");

  OsmMap map;
  auto attr = [](const pt::ptree& node, const std::string& key) -> std::optional<std::string> {
    if (auto v = node.get_optional<std::string>("<xmlattr>." + key)) return *v;
    return std::nullopt;
  };
  auto required = [&](const pt::ptree& node, const std::string& key, const char* element) {
    auto v = attr(node, key);
    if (!v) throw MalformedXml(std::string("<") + element + "> without '" + key + "'");
    return *v;
  };
  if (auto v = attr(*root, "origin_lat")) map.origin.lat0 = parse_degrees(*v, "origin_lat");
  if (auto v = attr(*root, "origin_lon")) map.origin.lon0 = parse_degrees(*v, "origin_lon");
  if (auto v = attr(*root, "origin_rotation")) map.origin.rotation = parse_degrees(*v, "origin_rotation");

  auto read_tags = [&](const pt::ptree& element, Tags& tags, const char* owner) {
    for (const auto& [name, child] : element)
      if (name == "tag") tags[required(child, "k", "tag")] = required(child, "v", "tag");
    (void)owner;
  };
  for (const auto& [name, child] : *root) {
    if (name == "node") {
      OsmNode n;
      n.id = parse_id(required(child, "id", "node"), "node id");
      n.lat = parse_degrees(required(child, "lat", "node"), "lat");
      n.lon = parse_degrees(required(child, "lon", "node"), "lon");
      read_tags(child, n.tags, "node");
      map.nodes.push_back(std::move(n));
    } else if (name == "way") {
      OsmWay w;
      w.id = parse_id(required(child, "id", "way"), "way id");
      for (const auto& [cname, nd] : child)
        if (cname == "nd") w.node_refs.push_back(parse_id(required(nd, "ref", "nd"), "node ref"));
      read_tags(child, w.tags, "way");
      map.ways.push_back(std::move(w));
    }
  }

  std::size_t positive = 0, negative = 0;
  std::set<OsmId> node_ids, way_ids;
  for (const auto& n : map.nodes) {
    if (n.id == 0) throw MalformedXml("node id 0");
    (n.id > 0 ? positive : negative)++;
    if (!node_ids.insert(n.id).second) throw MalformedXml("duplicate node id " + std::to_string(n.id));
  }
  for (const auto& w : map.ways) {
    if (w.id == 0) throw MalformedXml("way id 0");
    (w.id > 0 ? positive : negative)++;
    if (!way_ids.insert(w.id).second) throw MalformedXml("duplicate way id " + std::to_string(w.id));
  }
  if (positive > 0 && negative > 0) throw MixedIdSigns("positive and negative ids are mixed");
  for (const auto& w : map.ways)
    for (OsmId r : w.node_refs)
      if (!node_ids.count(r))
        throw DanglingReference("way " + std::to_string(w.id) + " references missing node " +
                                std::to_string(r));
  return map;
}

std::vector<std::string> validate_schema(const OsmMap& map) {
  std::vector<std::string> out;
  const auto idx = map.node_index();
  std::set<OsmId> ids;
  for (const auto& n : map.nodes) {
    if (n.id >= 0) out.push_back("node " + std::to_string(n.id) + ": id not negative");
    if (!ids.insert(n.id).second) out.push_back("node " + std::to_string(n.id) + ": duplicate id");
  }
  std::map<OsmId, std::string> node_level;
  for (const auto& w : map.ways) {
    const std::string tag = "way " + std::to_string(w.id);
    if (w.id >= 0) out.push_back(tag + ": id not negative");
    if (!ids.insert(w.id).second) out.push_back(tag + ": duplicate id");
    // A composite "i;j" level on a two-node way puts each end on its own level.
    const std::string level = w.tag("level");
    const auto semi = level.find(';');
    const bool composite = semi != std::string::npos && w.node_refs.size() == 2;
    for (std::size_t k = 0; k < w.node_refs.size(); ++k) {
      const OsmId r = w.node_refs[k];
      if (!idx.count(r)) out.push_back(tag + ": dangling node ref " + std::to_string(r));
      node_level.emplace(r, composite ? (k == 0 ? level.substr(0, semi) : level.substr(semi + 1)) : level);
    }
    const std::string type = w.tag("osmAG:type");
    if (type == "area") {
      const std::string indoor = w.tag("indoor");
      if (indoor != "room" && indoor != "corridor" && indoor != "level")
        out.push_back(tag + ": area with indoor='" + indoor + "'");
      if (!w.closed() || w.node_refs.size() < 4) out.push_back(tag + ": area way not closed with >= 4 refs");
    } else if (type == "passage") {
      if (w.node_refs.size() != 2) out.push_back(tag + ": passage way without exactly 2 refs");
    } else if (type == "structure") {
      if (!w.closed() || w.node_refs.size() < 4) out.push_back(tag + ": structure way not closed");
    } else {
      out.push_back(tag + ": osmAG:type='" + type + "' not in {area, passage, structure}");
    }
  }
  // Node dedup on the serialized grid, scoped per level so stacked floors
  // may repeat positions.
  std::set<std::tuple<std::string, std::int64_t, std::int64_t>> seen;
  for (const auto& n : map.nodes) {
    auto it = node_level.find(n.id);
    const std::string level = it == node_level.end() ? std::string() : it->second;
    if (!seen.emplace(level, fixed7(n.lat), fixed7(n.lon)).second)
      out.push_back("node " + std::to_string(n.id) + ": duplicates another node's position");
  }
  return out;
}

Ring2d way_polygon(const OsmMap& map, const OsmWay& way) {
  const auto idx = map.node_index();
  Ring2d ring;
  for (OsmId r : way.node_refs) {
    auto it = idx.find(r);
    if (it == idx.end()) continue;
    const OsmNode& n = map.nodes[it->second];
    ring.push_back(latlon_to_cartesian({n.lat, n.lon}, map.origin));
  }
  if (way.closed() && !ring.empty()) ring.pop_back();
  return ring;
}

std::vector<OsmArea> room_areas(const OsmMap& map) {
  std::vector<OsmArea> out;
  for (const auto& w : map.ways) {
    if (!is_room_way(w)) continue;
    OsmArea a;
    a.way_id = w.id;
    a.polygon = way_polygon(map, w);
    make_ccw(a.polygon);
    a.tags = w.tags;
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<OsmPassage> passages(const OsmMap& map) {
  std::vector<OsmPassage> out;
  const auto idx = map.node_index();
  for (const auto& w : map.ways) {
    if (w.tag("osmAG:type") != "passage" || w.node_refs.size() != 2) continue;
    OsmPassage p;
    p.way_id = w.id;
    p.tags = w.tags;
    for (int k = 0; k < 2; ++k) {
      p.node_refs[k] = w.node_refs[k];
      const OsmNode& n = map.nodes[idx.at(w.node_refs[k])];
      p.endpoints[k] = latlon_to_cartesian({n.lat, n.lon}, map.origin);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::optional<std::pair<OsmId, OsmId>> passage_rooms(const OsmMap& map, const OsmWay& passage) {
  if (passage.node_refs.size() != 2) return std::nullopt;
  const std::string level = passage.tag("level");
  std::vector<OsmId> holders;
  for (const auto& w : map.ways) {
    if (!is_room_way(w) || w.tag("level") != level) continue;
    const auto& refs = w.node_refs;
    if (std::find(refs.begin(), refs.end(), passage.node_refs[0]) != refs.end() &&
        std::find(refs.begin(), refs.end(), passage.node_refs[1]) != refs.end())
      holders.push_back(w.id);
  }
  if (holders.size() == 2) return std::make_pair(holders[0], holders[1]);

  auto resolve = [&](const std::string& ref) -> std::optional<OsmId> {
    if (ref.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      const long long id = std::stoll(ref, &used);
      if (used == ref.size()) {
        if (const OsmWay* w = map.find_way(id); w && is_room_way(*w)) return id;
      }
    } catch (const std::exception&) {
    }
    const std::string plevel = level.find(';') == std::string::npos ? level : std::string();
    for (const auto& w : map.ways)
      if (is_room_way(w) && w.tag("name") == ref && (plevel.empty() || w.tag("level") == plevel))
        return w.id;
    return std::nullopt;
  };
  const auto a = resolve(passage.tag("osmAG:from"));
  const auto b = resolve(passage.tag("osmAG:to"));
  if (a && b && *a != *b) return std::make_pair(*a, *b);
  return std::nullopt;
}

}  // namespace cad2osm
