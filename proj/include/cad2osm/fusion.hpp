#pragma once

// Multi-floor fusion: one building root, one level area per floor, rooms
// parented to their level, and vertical passages between stacked stairs or
// elevators on adjacent levels.

#include "cad2osm/osm.hpp"

#include <string>
#include <vector>

namespace cad2osm {

struct FloorSpec {
  OsmMap map;
  int level = 0;
  double elevation_m = 0.0;
  std::vector<std::string> stair_keywords{"STAIR", "ELEV", "LIFT"};
};

struct FusionParams {
  double min_iou = 0.3;
  double max_centroid_distance = 2.0;  // m
};

struct VerticalLink {
  OsmId area_i = 0;  // way ids in the per-floor maps
  OsmId area_j = 0;
  int level_i = 0, level_j = 0;
  Point2d centroid_i, centroid_j;
  bool elevator = false;
};

/// Requires |level_i - level_j| == 1; greedy one-to-one matching of stair
/// and elevator areas by IoU, then centroid distance.
std::vector<VerticalLink> detect_vertical_links(const FloorSpec& floor_i, const FloorSpec& floor_j,
                                                const FusionParams& params = {});

struct FusionResult {
  OsmMap map;
  std::vector<VerticalLink> links;
  std::vector<std::string> warnings;
};

/// Throws ManifestError for fewer than two floors, OriginMismatch and
/// DuplicateLevel.
FusionResult fuse_floors(const std::vector<FloorSpec>& floors, const FusionParams& params = {});

struct HierarchyReport {
  std::vector<std::string> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

HierarchyReport validate_hierarchy(const OsmMap& map);

/// Rooms as vertices; same-level passages and vertical passages as edges.
bool room_graph_connected(const OsmMap& map);

}  // namespace cad2osm
