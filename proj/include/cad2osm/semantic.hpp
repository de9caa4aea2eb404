#pragma once

// Text-to-room association by the inside / nearby score functions, in the
// raster pixel frame.

#include "cad2osm/area_graph.hpp"
#include "cad2osm/cad.hpp"

#include <vector>

namespace cad2osm {

struct ScoreParams {
  double rho_max = 0.7;
  double D_max = 50.0;  // pixels

  void validate() const;
};

struct ScoringContext {
  Point2d p;
  Ring2d P;
  Point2d c;
  double A = 0.0;    // px²
  double S = 0.0;    // px, sqrt(A / pi)
  double d_c = 0.0;  // px
  double d_b = 0.0;  // px
  double rho = 0.0;
  bool inside = false;

  static ScoringContext make(const Point2d& p, const Ring2d& P);
};

/// 100 - 50 rho up to rho_max, then 50 - 25 (rho - rho_max). Throws
/// WrongCase when p lies outside P.
double score_inside(const ScoringContext& ctx, const ScoreParams& params);

/// 40 + 30 f_size + 20 f_dist. Throws WrongCase when p is inside P or
/// d_b >= D_max.
double score_nearby(const ScoringContext& ctx, const ScoreParams& params);

enum class MatchCase { Inside, Nearby };

struct Assignment {
  TextAnnotation text;
  int room_id = 0;
  double score = 0.0;
  MatchCase match_case = MatchCase::Inside;
};

struct AssociationResult {
  std::vector<Assignment> assignments;
  std::vector<TextAnnotation> unassigned;
};

/// Texts and room polygons must already share the pixel frame.
AssociationResult associate_texts(const std::vector<TextAnnotation>& texts,
                                  const std::vector<RoomArea>& rooms, const ScoreParams& params);

Point2d world_to_pixel_frame(const Point2d& world, const GridTransform& t);
Ring2d world_to_pixel_frame(const Ring2d& world, const GridTransform& t);

/// Moves drawing-unit annotations into the pixel frame of `graph`, scores
/// them against its rooms and writes name / osmAG:extra_text tags.
AssociationResult annotate_rooms(AreaGraph& graph, const std::vector<TextAnnotation>& texts_du,
                                 double drawing_unit_scale, const ScoreParams& params);

/// First text per room becomes `name`, later ones are joined with ';' into
/// `osmAG:extra_text`, in assignment order.
void apply_names(AreaGraph& graph, const AssociationResult& result);

}  // namespace cad2osm
