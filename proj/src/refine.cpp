#include "cad2osm/refine.hpp"

#include "cad2osm/boolean.hpp"
#include "cad2osm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace cad2osm {
namespace {

bool lex_less(const Point2d& a, const Point2d& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

bool is_preserved(const Point2d& p, const PreservedPoints& preserve) {
  return std::any_of(preserve.begin(), preserve.end(), [&](const Point2d& q) { return q == p; });
}

// Turning angle at each vertex between the chords reaching `reach` metres of
// arc back and ahead along the ring.
std::vector<double> chord_turning(const Ring2d& ring, double reach) {
  const std::size_t n = ring.size();
  std::vector<double> arc(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) arc[i + 1] = arc[i] + (ring[(i + 1) % n] - ring[i]).norm();
  const double total = arc[n];
  auto point_at = [&](double s) -> Point2d {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
    const auto it = std::upper_bound(arc.begin(), arc.end(), s);
    const std::size_t k = std::min<std::size_t>(n - 1, std::size_t(it - arc.begin()) - 1);
    const double len = arc[k + 1] - arc[k];
    const double t = len > 0.0 ? (s - arc[k]) / len : 0.0;
    return ring[k] + t * (ring[(k + 1) % n] - ring[k]);
  };
  std::vector<double> out(n, 0.0);
  if (total <= 2.0 * reach) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2d a = ring[i] - point_at(arc[i] - reach);
    const Point2d b = point_at(arc[i] + reach) - ring[i];
    out[i] = std::atan2(cross<double>(a, b), a.dot(b));
  }
  return out;
}

std::size_t farthest_from(const Ring2d& ring, std::size_t from) {
  std::size_t best = from;
  double best_d = -1.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const double d = (ring[i] - ring[from]).squaredNorm();
    if (d > best_d || (d == best_d && lex_less(ring[i], ring[best]))) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Per-vertex tolerance: eps, reduced on curvilinear stretches. The window is
// curve_window vertices spaced eps apart along the ring, so raster staircases
// do not read as curvature. Along a circular arc the tangent turns twice the
// chord-to-chord angle, and halving the reach halves it; near a sharp corner
// it does not shrink, which keeps corners at eps.
std::vector<double> adaptive_tolerance(const Ring2d& ring, double eps, const RefineParams& params) {
  const std::size_t n = ring.size();
  const double rate = params.curve_turn_rate * kPi / 180.0;
  const double reach = eps * params.curve_window / 2.0;
  const std::vector<double> turn = chord_turning(ring, reach);
  const std::vector<double> turn_half = chord_turning(ring, reach / 2.0);
  std::vector<double> tol(n, eps);
  for (std::size_t i = 0; i < n; ++i) {
    const double full = std::abs(turn[i]), part = std::abs(turn_half[i]);
    const bool curved = 2.0 * full / params.curve_window > rate &&
                        4.0 * part / params.curve_window > rate && full >= 1.5 * part;
    if (curved) tol[i] = eps * params.curve_factor;
  }
  return tol;
}

// One Douglas-Peucker pass between consecutive anchors; returns the indices
// of the kept vertices.
std::vector<std::size_t> douglas_peucker(const Ring2d& ring, const std::vector<double>& tol,
                                         const PreservedPoints& preserve,
                                         std::vector<std::string>* warnings) {
  const std::size_t n = ring.size();
  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < n; ++i)
    if (is_preserved(ring[i], preserve)) anchors.push_back(i);
  if (anchors.empty()) {
    std::size_t lo = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (lex_less(ring[i], ring[lo])) lo = i;
    anchors.push_back(lo);
  }
  if (anchors.size() == 1) {
    anchors.push_back(farthest_from(ring, anchors.front()));
    std::sort(anchors.begin(), anchors.end());
  }

  std::vector<char> keep(n, 0);
  for (std::size_t a : anchors) keep[a] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (start, span) in ring steps
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const std::size_t a = anchors[k];
    const std::size_t b = anchors[(k + 1) % anchors.size()];
    const std::size_t span = (b + n - a) % n;
    stack.emplace_back(a, span == 0 ? n : span);
  }
  while (!stack.empty()) {
    const auto [a, span] = stack.back();
    stack.pop_back();
    if (span < 2) continue;
    const Point2d& pa = ring[a];
    const Point2d& pb = ring[(a + span) % n];
    double excess = 0.0;
    std::size_t split = 0;
    for (std::size_t s = 1; s < span; ++s) {
      const std::size_t i = (a + s) % n;
      const double e = point_segment_distance<double>(ring[i], pa, pb) - tol[i];
      if (e > excess || (e == excess && e > 0.0 && lex_less(ring[i], ring[(a + split) % n]))) {
        excess = e;
        split = s;
      }
    }
    if (split == 0) continue;
    keep[(a + split) % n] = 1;
    stack.emplace_back(a, split);
    stack.emplace_back((a + split) % n, span - split);
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(i);
  if (out.size() < 3) {
    // Keep a triangle: add the vertex farthest from the anchor segment.
    const Point2d pa = ring[out.front()];
    const Point2d pb = ring[out.back()];
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (keep[i]) continue;
      const double d = point_segment_distance<double>(ring[i], pa, pb);
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    keep[best] = 1;
    out.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) out.push_back(i);
    if (warnings) warnings->push_back("simplification reached fewer than 3 vertices; kept a triangle");
  }
  return out;
}

}  // namespace

void RefineParams::validate() const {
  if (!(epsilon_simplify > 0.0)) throw ConfigError("epsilon_simplify must be > 0");
  if (!(theta_spike > 0.0 && theta_spike < 90.0)) throw ConfigError("theta_spike must be in (0, 90)");
  if (!(A_min >= 0.0)) throw ConfigError("A_min must be >= 0");
  if (!(d_max_merge >= 0.0)) throw ConfigError("d_max_merge must be >= 0");
  if (!(curve_turn_rate > 0.0)) throw ConfigError("curve_turn_rate must be > 0");
  if (curve_window < 1) throw ConfigError("curve_window must be >= 1");
  if (!(curve_factor > 0.0 && curve_factor <= 1.0)) throw ConfigError("curve_factor must be in (0, 1]");
}

std::vector<RoomArea> remove_duplicate_polygons(const std::vector<RoomArea>& rooms,
                                                std::map<int, int>* replaced) {
  std::vector<RoomArea> kept;
  for (const auto& room : rooms) {
    const RoomArea* twin = nullptr;
    for (const auto& k : kept) {
      const double smaller = std::min(room.area_m2(), k.area_m2());
      if (symmetric_difference_area(room.polygon, k.polygon) < 0.01 * smaller) {
        twin = &k;
        break;
      }
    }
    if (twin) {
      if (replaced) (*replaced)[room.id] = twin->id;
    } else {
      kept.push_back(room);
    }
  }
  return kept;
}

AreaGraph remove_duplicate_polygons(AreaGraph graph) {
  std::map<int, int> replaced;
  graph.rooms = remove_duplicate_polygons(graph.rooms, &replaced);
  std::vector<Passage> passages;
  for (auto p : graph.passages) {
    if (auto it = replaced.find(p.room_a); it != replaced.end()) p.room_a = it->second;
    if (auto it = replaced.find(p.room_b); it != replaced.end()) p.room_b = it->second;
    if (p.room_a != p.room_b) passages.push_back(p);
  }
  graph.passages = std::move(passages);
  return graph;
}

void insert_boundary_points(Ring2d& ring, const PreservedPoints& points, double tolerance) {
  for (const auto& p : points) {
    if (ring.size() < 2 || std::find(ring.begin(), ring.end(), p) != ring.end()) continue;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const double d = point_segment_distance<double>(p, ring[i], ring[(i + 1) % ring.size()]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best_d <= tolerance) ring.insert(ring.begin() + static_cast<std::ptrdiff_t>(best + 1), p);
  }
}

PreservedPoints passage_endpoints(const AreaGraph& graph, int room_id) {
  PreservedPoints pts;
  for (const auto& p : graph.passages)
    if (p.room_a == room_id || p.room_b == room_id)
      for (const auto& e : p.endpoints)
        if (std::find(pts.begin(), pts.end(), e) == pts.end()) pts.push_back(e);
  return pts;
}

void absorb_room(AreaGraph& graph, int absorber, int absorbed, double d_max_merge) {
  RoomArea* a = graph.find_room(absorber);
  RoomArea* b = graph.find_room(absorbed);
  if (!a || !b || a == b) throw InvalidEdit("absorb_room: unknown or identical rooms");
  std::vector<Ring2d> rings = union_rings(a->polygon, b->polygon);
  if (rings.size() > 1) {
    // Bridge a small gap with the hull of the vertices facing the other room.
    std::vector<Point2d> near;
    const double reach = d_max_merge + 1e-9;
    for (const auto& p : a->polygon)
      if (boundary_distance(p, b->polygon) <= reach) near.push_back(p);
    for (const auto& p : b->polygon)
      if (boundary_distance(p, a->polygon) <= reach) near.push_back(p);
    const Ring2d bridge = convex_hull(near);
    if (bridge.size() >= 3) {
      std::vector<Ring2d> joined;
      for (const auto& r : union_rings(a->polygon, bridge))
        for (const auto& u : union_rings(r, b->polygon)) joined.push_back(u);
      if (!joined.empty()) rings = joined;
    }
    std::sort(rings.begin(), rings.end(),
              [](const Ring2d& x, const Ring2d& y) { return area(x) > area(y); });
  }
  if (!rings.empty()) a->polygon = rings.front();

  std::vector<Passage> passages;
  for (auto p : graph.passages) {
    const bool shared = (p.room_a == absorber && p.room_b == absorbed) ||
                        (p.room_a == absorbed && p.room_b == absorber);
    if (shared) continue;
    if (p.room_a == absorbed) p.room_a = absorber;
    if (p.room_b == absorbed) p.room_b = absorber;
    if (p.room_a != p.room_b) passages.push_back(p);
  }
  graph.passages = std::move(passages);
  graph.rooms.erase(std::remove_if(graph.rooms.begin(), graph.rooms.end(),
                                   [&](const RoomArea& r) { return r.id == absorbed; }),
                    graph.rooms.end());
  RoomArea* merged = graph.find_room(absorber);
  insert_boundary_points(merged->polygon, passage_endpoints(graph, absorber),
                         2.0 * graph.transform.resolution);
}

AreaGraph merge_small_rooms(AreaGraph graph, double A_min, double d_max_merge) {
  while (true) {
    std::vector<const RoomArea*> order;
    for (const auto& r : graph.rooms) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const RoomArea* x, const RoomArea* y) {
      return x->area_m2() < y->area_m2() || (x->area_m2() == y->area_m2() && x->id < y->id);
    });
    int absorber = -1, absorbed = -1;
    for (const RoomArea* s : order) {
      const double as = s->area_m2();
      if (as >= A_min) break;
      std::set<int> linked;
      for (const auto& p : graph.passages) {
        if (p.room_a == s->id) linked.insert(p.room_b);
        if (p.room_b == s->id) linked.insert(p.room_a);
      }
      const RoomArea* best = nullptr;
      for (const auto& r : graph.rooms) {
        if (r.id == s->id || r.area_m2() <= as) continue;
        if (!linked.count(r.id) && ring_distance(s->polygon, r.polygon) > d_max_merge) continue;
        if (!best || r.area_m2() > best->area_m2() ||
            (r.area_m2() == best->area_m2() && r.id < best->id))
          best = &r;
      }
      if (best) {
        absorber = best->id;
        absorbed = s->id;
        break;
      }
    }
    if (absorber < 0) break;
    absorb_room(graph, absorber, absorbed, d_max_merge);
  }
  return graph;
}

AreaGraph merge_rooms(AreaGraph graph, const std::vector<int>& room_ids) {
  std::set<int> pending(room_ids.begin(), room_ids.end());
  if (pending.size() < 2) throw InvalidEdit("merge needs at least two distinct rooms");
  int target = -1;
  for (int id : pending) {
    const RoomArea* r = graph.find_room(id);
    if (!r) throw InvalidEdit("unknown room id " + std::to_string(id));
    if (target < 0 || r->area_m2() > graph.find_room(target)->area_m2()) target = id;
  }
  pending.erase(target);
  const double touch = 2.0 * graph.transform.resolution;
  while (!pending.empty()) {
    int next = -1;
    for (int id : pending) {
      bool adjacent = false;
      for (const auto& p : graph.passages)
        if ((p.room_a == id && p.room_b == target) || (p.room_b == id && p.room_a == target))
          adjacent = true;
      if (!adjacent)
        adjacent = ring_distance(graph.find_room(id)->polygon, graph.find_room(target)->polygon) <= touch;
      if (adjacent) {
        next = id;
        break;
      }
    }
    if (next < 0) throw InvalidEdit("selected rooms are not adjacent");
    absorb_room(graph, target, next, touch);
    pending.erase(next);
  }
  return graph;
}

Ring2d simplify_polygon(const Ring2d& polygon, double epsilon_simplify,
                        const PreservedPoints& preserve, const RefineParams& params,
                        std::vector<std::string>* warnings) {
  if (polygon.size() <= 3) return polygon;
  Ring2d current = polygon;
  insert_boundary_points(current, preserve, std::numeric_limits<double>::infinity());
  // Tolerances come from the input outline and travel with their vertices.
  std::vector<double> tol = adaptive_tolerance(current, epsilon_simplify, params);
  for (int pass = 0; pass < 32; ++pass) {
    std::vector<std::size_t> kept;
    bool simple = false;
    double scale = 1.0;
    for (int attempt = 0; attempt < 12 && !simple; ++attempt, scale /= 2.0) {
      std::vector<double> scaled = tol;
      for (double& t : scaled) t *= scale;
      kept = douglas_peucker(current, scaled, preserve, warnings);
      Ring2d next;
      for (std::size_t i : kept) next.push_back(current[i]);
      simple = is_simple(next);
    }
    if (!simple) {
      if (warnings) warnings->push_back("simplification could not keep the polygon simple");
      return current;
    }
    if (kept.size() == current.size()) break;
    Ring2d next;
    std::vector<double> next_tol;
    for (std::size_t i : kept) {
      next.push_back(current[i]);
      next_tol.push_back(tol[i]);
    }
    current = std::move(next);
    tol = std::move(next_tol);
  }
  return current;
}

Ring2d remove_spikes(const Ring2d& polygon, double theta_spike_deg, const PreservedPoints& preserve,
                     std::vector<std::string>* warnings) {
  Ring2d ring = polygon;
  const double theta = theta_spike_deg * kPi / 180.0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < ring.size();) {
      if (is_preserved(ring[i], preserve) || interior_angle(ring, i) >= theta) {
        ++i;
        continue;
      }
      if (ring.size() <= 3) {
        if (warnings) warnings->push_back("spike removal stopped at 3 vertices");
        return ring;
      }
      Ring2d candidate = ring;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
      if (!is_simple(candidate)) {
        ++i;
        continue;
      }
      ring = std::move(candidate);
      changed = true;
    }
  }
  return ring;
}

AreaGraph refine(AreaGraph graph, const RefineParams& params, std::vector<std::string>* warnings) {
  params.validate();
  graph = remove_duplicate_polygons(std::move(graph));
  graph = merge_small_rooms(std::move(graph), params.A_min, params.d_max_merge);
  for (auto& room : graph.rooms) {
    const PreservedPoints keep = passage_endpoints(graph, room.id);
    room.polygon = simplify_polygon(room.polygon, params.epsilon_simplify, keep, params, warnings);
    room.polygon = remove_spikes(room.polygon, params.theta_spike, keep, warnings);
  }
  return graph;
}

}  // namespace cad2osm
