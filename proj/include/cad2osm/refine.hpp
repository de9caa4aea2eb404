#pragma once

// Cleanup of a raw AreaGraph: duplicate removal, absorption of small rooms,
// vertex reduction that keeps passage endpoints, and spike removal.

#include "cad2osm/area_graph.hpp"

#include <string>
#include <vector>

namespace cad2osm {

struct RefineParams {
  double epsilon_simplify = 0.10;  // m
  double theta_spike = 15.0;       // degrees
  double A_min = 1.0;              // m²
  double d_max_merge = 0.3;        // m

  // Curvilinear stretches (mean turning over the window above the rate)
  // are simplified with epsilon_simplify * curve_factor.
  double curve_turn_rate = 15.0;  // degrees per vertex
  int curve_window = 5;
  double curve_factor = 0.25;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

using PreservedPoints = std::vector<Point2d>;

/// Keeps the first of every group of rooms whose symmetric difference is
/// below 1% of the smaller area. `replaced` receives dropped id -> kept id.
std::vector<RoomArea> remove_duplicate_polygons(const std::vector<RoomArea>& rooms,
                                                std::map<int, int>* replaced = nullptr);

/// Graph form: also re-points passages and drops the ones that collapse.
AreaGraph remove_duplicate_polygons(AreaGraph graph);

AreaGraph merge_small_rooms(AreaGraph graph, double A_min, double d_max_merge);

/// Unions `absorbed` into `absorber`, deletes their shared passages and
/// re-points the absorbed room's other passages.
void absorb_room(AreaGraph& graph, int absorber, int absorbed, double d_max_merge);

/// Interactive merge of the given rooms into the largest of them. Throws
/// InvalidEdit when the rooms are unknown or not mutually reachable through
/// passages or touching boundaries.
AreaGraph merge_rooms(AreaGraph graph, const std::vector<int>& room_ids);

Ring2d simplify_polygon(const Ring2d& polygon, double epsilon_simplify,
                        const PreservedPoints& preserve, const RefineParams& params = {},
                        std::vector<std::string>* warnings = nullptr);

Ring2d remove_spikes(const Ring2d& polygon, double theta_spike_deg, const PreservedPoints& preserve,
                     std::vector<std::string>* warnings = nullptr);

/// Inserts each point not already a vertex onto its nearest edge when it is
/// within `tolerance` of the ring.
void insert_boundary_points(Ring2d& ring, const PreservedPoints& points, double tolerance);

/// Passage endpoints of every passage touching room `room_id`.
PreservedPoints passage_endpoints(const AreaGraph& graph, int room_id);

/// Duplicate removal, small-room merging, then per-room simplification and
/// spike removal with passage endpoints preserved.
AreaGraph refine(AreaGraph graph, const RefineParams& params,
                 std::vector<std::string>* warnings = nullptr);

}  // namespace cad2osm
