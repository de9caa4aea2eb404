#pragma once

// OpenStreetMap node/way/tag model with the osmAG tag schema, local
// geo-referencing and a canonical XML form.

#include "cad2osm/area_graph.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cad2osm {

using OsmId = std::int64_t;
using Tags = std::map<std::string, std::string>;

inline constexpr double kEarthRadius = 6378137.0;

struct GeoOrigin {
  double lat0 = 0.0;
  double lon0 = 0.0;
  double rotation = 0.0;  // degrees, map east vs. true east

  /// Throws UnsupportedLatitude for |lat0| > 85 and ConfigError for |lon0| > 180.
  void validate() const;
  bool operator==(const GeoOrigin& o) const {
    return lat0 == o.lat0 && lon0 == o.lon0 && rotation == o.rotation;
  }
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Equirectangular local tangent plane. Throws ConfigError beyond 50 km.
LatLon cartesian_to_latlon(const Point2d& p, const GeoOrigin& origin);
Point2d latlon_to_cartesian(const LatLon& ll, const GeoOrigin& origin);

struct OsmNode {
  OsmId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  Tags tags;
};

struct OsmWay {
  OsmId id = 0;
  std::vector<OsmId> node_refs;
  Tags tags;

  [[nodiscard]] bool closed() const { return node_refs.size() >= 2 && node_refs.front() == node_refs.back(); }
  [[nodiscard]] std::string tag(const std::string& k) const {
    auto it = tags.find(k);
    return it == tags.end() ? std::string() : it->second;
  }
};

struct OsmBounds {
  double minlat = 0, minlon = 0, maxlat = 0, maxlon = 0;
};

struct OsmMap {
  std::vector<OsmNode> nodes;
  std::vector<OsmWay> ways;
  GeoOrigin origin;

  [[nodiscard]] OsmBounds bounds() const;
  [[nodiscard]] std::unordered_map<OsmId, std::size_t> node_index() const;
  [[nodiscard]] const OsmWay* find_way(OsmId id) const;
  OsmWay* find_way(OsmId id);
};

/// Coordinates rounded to the serialized 7-decimal grid.
double quantize7(double degrees);
std::int64_t fixed7(double degrees);

/// Algorithm-order emission: per room its new vertices then its way, then
/// the passages. Ids descend from -1. Throws SerializationRefused when the
/// graph breaks its invariants.
OsmMap serialize_area_graph(const AreaGraph& graph, const GeoOrigin& origin, int level);

std::string write_osm_xml(const OsmMap& map);

/// Throws MalformedXml, DanglingReference or MixedIdSigns.
OsmMap read_osm_xml(std::string_view bytes);

/// Closed-world osmAG schema check; empty means valid.
std::vector<std::string> validate_schema(const OsmMap& map);

// Views used by fusion and evaluation.
struct OsmArea {
  OsmId way_id = 0;
  Ring2d polygon;  // world meters, counter-clockwise, open
  Tags tags;
};

struct OsmPassage {
  OsmId way_id = 0;
  std::array<Point2d, 2> endpoints;
  std::array<OsmId, 2> node_refs{};
  Tags tags;
};

/// Ways with osmAG:type=area and indoor=room|corridor.
std::vector<OsmArea> room_areas(const OsmMap& map);
std::vector<OsmPassage> passages(const OsmMap& map);
Ring2d way_polygon(const OsmMap& map, const OsmWay& way);

/// The two room ways a passage connects: rooms on the passage's level
/// whose rings contain both endpoint nodes, else osmAG:from/osmAG:to
/// resolved as way id or name on that level.
std::optional<std::pair<OsmId, OsmId>> passage_rooms(const OsmMap& map, const OsmWay& passage);

}  // namespace cad2osm
