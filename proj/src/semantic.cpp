#include "cad2osm/semantic.hpp"

#include "cad2osm/errors.hpp"

#include <cmath>

namespace cad2osm {

void ScoreParams::validate() const {
  if (!(rho_max > 0.0)) throw ConfigError("rho_max must be > 0");
  if (!(D_max > 0.0)) throw ConfigError("D_max must be > 0");
}

ScoringContext ScoringContext::make(const Point2d& p, const Ring2d& P) {
  ScoringContext ctx;
  ctx.p = p;
  ctx.P = P;
  ctx.c = centroid(P);
  ctx.A = area(P);
  ctx.S = std::sqrt(ctx.A / kPi);
  ctx.d_c = (p - ctx.c).norm();
  ctx.d_b = boundary_distance(p, P);
  ctx.rho = ctx.S > 0.0 ? ctx.d_c / ctx.S : 0.0;
  ctx.inside = contains(P, p);
  return ctx;
}

double score_inside(const ScoringContext& ctx, const ScoreParams& params) {
  if (!ctx.inside) throw WrongCase("score_inside called for a point outside the polygon");
  if (ctx.rho <= params.rho_max) return 100.0 - 50.0 * ctx.rho;
  return 50.0 - 25.0 * (ctx.rho - params.rho_max);
}

double score_nearby(const ScoringContext& ctx, const ScoreParams& params) {
  if (ctx.inside) throw WrongCase("score_nearby called for a point inside the polygon");
  if (ctx.d_b >= params.D_max) throw WrongCase("score_nearby called beyond D_max");
  const double f_size = 1.0 / (1.0 + std::log10(1.0 + ctx.A / 10000.0));
  const double f_dist = 1.0 - ctx.d_b / params.D_max;
  return 40.0 + 30.0 * f_size + 20.0 * f_dist;
}

AssociationResult associate_texts(const std::vector<TextAnnotation>& texts,
                                  const std::vector<RoomArea>& rooms, const ScoreParams& params) {
  params.validate();
  AssociationResult result;
  for (const auto& text : texts) {
    const RoomArea* best = nullptr;
    double best_score = 0.0, best_area = 0.0;
    MatchCase best_case = MatchCase::Inside;
    for (const auto& room : rooms) {
      const ScoringContext ctx = ScoringContext::make(text.position, room.polygon);
      double s = 0.0;
      MatchCase mc = MatchCase::Inside;
      if (ctx.inside) {
        s = score_inside(ctx, params);
      } else if (ctx.d_b < params.D_max) {
        s = score_nearby(ctx, params);
        mc = MatchCase::Nearby;
      }
      if (s <= 0.0) continue;
      const bool better = !best || s > best_score ||
                          (s == best_score && (ctx.A < best_area ||
                                               (ctx.A == best_area && room.id < best->id)));
      if (better) {
        best = &room;
        best_score = s;
        best_area = ctx.A;
        best_case = mc;
      }
    }
    if (best)
      result.assignments.push_back({text, best->id, best_score, best_case});
    else
      result.unassigned.push_back(text);
  }
  return result;
}

Point2d world_to_pixel_frame(const Point2d& world, const GridTransform& t) {
  return t.world_to_pixel(world);
}

Ring2d world_to_pixel_frame(const Ring2d& world, const GridTransform& t) {
  Ring2d out;
  out.reserve(world.size());
  for (const auto& p : world) out.push_back(t.world_to_pixel(p));
  return out;
}

void apply_names(AreaGraph& graph, const AssociationResult& result) {
  for (const auto& a : result.assignments) {
    RoomArea* room = graph.find_room(a.room_id);
    if (!room) continue;
    auto& tags = room->tags;
    if (!tags.count("name")) {
      tags["name"] = a.text.content;
    } else {
      auto& extra = tags["osmAG:extra_text"];
      extra += extra.empty() ? a.text.content : ";" + a.text.content;
    }
  }
}

AssociationResult annotate_rooms(AreaGraph& graph, const std::vector<TextAnnotation>& texts_du,
                                 double drawing_unit_scale, const ScoreParams& params) {
  std::vector<TextAnnotation> texts;
  for (auto t : texts_du) {
    t.position = world_to_pixel_frame(t.position * drawing_unit_scale, graph.transform);
    texts.push_back(std::move(t));
  }
  std::vector<RoomArea> rooms = graph.rooms;
  for (auto& r : rooms) r.polygon = world_to_pixel_frame(r.polygon, graph.transform);
  AssociationResult result = associate_texts(texts, rooms, params);
  apply_names(graph, result);
  return result;
}

}  // namespace cad2osm
