#pragma once

// Free-space segmentation into rooms and passages: distance-ridge skeleton,
// constriction (door chord) detection, region cutting and polygon tracing.

#include "cad2osm/geometry.hpp"
#include "cad2osm/image.hpp"
#include "cad2osm/raster.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cad2osm {

struct SkeletonVertex {
  Eigen::Vector2i pixel;  // (col, row)
  double clearance = 0.0;  // meters to the nearest occupied cell center
};

struct SkeletonEdge {
  int a = 0, b = 0;
  double min_clearance = 0.0;
};

struct VoronoiSkeleton {
  std::vector<SkeletonVertex> vertices;
  std::vector<SkeletonEdge> edges;
  GridTransform transform;

  [[nodiscard]] std::vector<std::vector<int>> adjacency() const;
  /// Connected components of the vertex graph (component index per vertex).
  [[nodiscard]] std::vector<int> component_of_vertices(int* count = nullptr) const;
};

struct SegmentationParams {
  double alpha = 1.2;             // m
  double prune_clearance = 0.25;  // m
  double door_max_width = 2.5;    // m

  /// Throws ConfigError unless all are positive and door_max_width >= prune_clearance.
  void validate() const;
};

/// A cut across a constriction, between two occupied pixels.
struct DoorChord {
  Eigen::Vector2i a, b;  // (col, row) of the two obstacle pixels
  Eigen::Vector2i site;  // skeleton pixel the chord was derived from
  double clearance = 0.0;
  double depth = 0.0;

  [[nodiscard]] double length_px() const { return (b - a).cast<double>().norm(); }
};

struct Segmentation {
  LabelImage labels;  // -1 outside rooms, otherwise 0..count-1
  int count = 0;
  std::vector<DoorChord> chords;  // only the separating ones
  GridTransform transform;
};

struct RoomArea {
  int id = 0;
  Ring2d polygon;  // counter-clockwise, world meters
  std::map<std::string, std::string> tags;

  [[nodiscard]] double area_m2() const { return area(polygon); }
};

struct Passage {
  int id = 0;
  std::array<Point2d, 2> endpoints;
  int room_a = 0, room_b = 0;

  [[nodiscard]] Point2d midpoint() const { return (endpoints[0] + endpoints[1]) / 2.0; }
};

struct AreaGraph {
  std::vector<RoomArea> rooms;
  std::vector<Passage> passages;
  GridTransform transform;
  std::optional<int> source_floor;

  [[nodiscard]] const RoomArea* find_room(int id) const;
  RoomArea* find_room(int id);
  /// Room-adjacency graph connectivity (true for zero or one room).
  [[nodiscard]] bool room_graph_connected() const;
};

VoronoiSkeleton compute_voronoi(const OccupancyGrid& grid);

VoronoiSkeleton extract_skeleton(const VoronoiSkeleton& vd, double prune_clearance);

Segmentation alpha_shape_segment(const VoronoiSkeleton& skel, const OccupancyGrid& grid,
                                 const SegmentationParams& params);

/// Traces every region along pixel edges and derives one passage per chain
/// of shared pixel edges between two regions. Throws SegmentationBug when the
/// resulting graph violates its invariants.
AreaGraph build_area_graph(const Segmentation& seg, const OccupancyGrid& grid);

/// Counter-clockwise crack-following outline of the 4-connected region
/// labels == label, in lattice-corner coordinates (x = col, y = row).
std::vector<Eigen::Vector2d> trace_region(const LabelImage& labels, int label);

struct InvariantOptions {
  double resolution = 0.05;
  std::optional<double> interior_free_area;  // m², enables the coverage check
};

/// Empty when every AreaGraph invariant holds; one message per violation.
std::vector<std::string> check_area_graph(const AreaGraph& graph, const InvariantOptions& opt);

}  // namespace cad2osm
