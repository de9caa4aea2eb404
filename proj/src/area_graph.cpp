#include "cad2osm/area_graph.hpp"

#include "cad2osm/boolean.hpp"
#include "cad2osm/errors.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace cad2osm {
namespace {

// 3x3 ring around a pixel, (drow, dcol), walked around the center.
constexpr std::array<std::array<int, 2>, 8> kRing{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}}};

int count_ring_components(unsigned mask, bool foreground, bool eight, bool need_4_touch) {
  std::array<bool, 8> seen{};
  int comps = 0;
  for (int s = 0; s < 8; ++s) {
    if (seen[s] || (((mask >> s) & 1u) != 0) != foreground) continue;
    bool touches4 = false;
    std::vector<int> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      if (i % 2 == 1) touches4 = true;
      for (int j = 0; j < 8; ++j) {
        if (seen[j] || (((mask >> j) & 1u) != 0) != foreground) continue;
        const int dr = std::abs(kRing[i][0] - kRing[j][0]);
        const int dc = std::abs(kRing[i][1] - kRing[j][1]);
        const bool adj = eight ? std::max(dr, dc) == 1 : dr + dc == 1;
        if (!adj) continue;
        seen[j] = true;
        stack.push_back(j);
      }
    }
    if (!need_4_touch || touches4) ++comps;
  }
  return comps;
}

// Simple points for 8-connected foreground / 4-connected background.
const std::array<bool, 256>& simple_table() {
  static const std::array<bool, 256> table = [] {
    std::array<bool, 256> t{};
    for (unsigned m = 0; m < 256; ++m)
      t[m] = count_ring_components(m, true, true, false) == 1 &&
             count_ring_components(m, false, false, true) == 1;
    return t;
  }();
  return table;
}

unsigned ring_mask(const Mask& keep, int r, int c) {
  unsigned m = 0;
  for (int i = 0; i < 8; ++i) {
    const int rr = r + kRing[i][0];
    const int cc = c + kRing[i][1];
    if (rr >= 0 && cc >= 0 && rr < keep.rows() && cc < keep.cols() && keep(rr, cc)) m |= 1u << i;
  }
  return m;
}

struct UnionFind {
  std::vector<int> parent;
  std::vector<double> peak;
  explicit UnionFind(std::size_t n) : parent(n), peak(n, 0.0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

double segment_distance(const Point2d& a1, const Point2d& a2, const Point2d& b1,
                        const Point2d& b2) {
  if (segments_intersect<double>(a1, a2, b1, b2)) return 0.0;
  return std::min({point_segment_distance<double>(a1, b1, b2),
                   point_segment_distance<double>(a2, b1, b2),
                   point_segment_distance<double>(b1, a1, a2),
                   point_segment_distance<double>(b2, a1, a2)});
}

std::vector<Eigen::Vector2i> bresenham(Eigen::Vector2i a, const Eigen::Vector2i& b) {
  std::vector<Eigen::Vector2i> out;
  const int dx = std::abs(b.x() - a.x()), sx = a.x() < b.x() ? 1 : -1;
  const int dy = -std::abs(b.y() - a.y()), sy = a.y() < b.y() ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.push_back(a);
    if (a == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      a.x() += sx;
    }
    if (e2 <= dx) {
      err += dx;
      a.y() += sy;
    }
  }
  return out;
}

struct CornerLess {
  bool operator()(const Eigen::Vector2i& a, const Eigen::Vector2i& b) const {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  }
};

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::vector<int>> VoronoiSkeleton::adjacency() const {
  std::vector<std::vector<int>> adj(vertices.size());
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  return adj;
}

std::vector<int> VoronoiSkeleton::component_of_vertices(int* count) const {
  const auto adj = adjacency();
  std::vector<int> comp(vertices.size(), -1);
  int n = 0;
  for (std::size_t s = 0; s < vertices.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = n;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : adj[v])
        if (comp[u] < 0) {
          comp[u] = n;
          stack.push_back(u);
        }
    }
    ++n;
  }
  if (count) *count = n;
  return comp;
}

void SegmentationParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(prune_clearance > 0.0)) throw ConfigError("prune_clearance must be > 0");
  if (!(door_max_width > 0.0)) throw ConfigError("door_max_width must be > 0");
  if (door_max_width < prune_clearance)
    throw ConfigError("door_max_width must be >= prune_clearance");
}

const RoomArea* AreaGraph::find_room(int id) const {
  for (const auto& r : rooms)
    if (r.id == id) return &r;
  return nullptr;
}

RoomArea* AreaGraph::find_room(int id) {
  for (auto& r : rooms)
    if (r.id == id) return &r;
  return nullptr;
}

bool AreaGraph::room_graph_connected() const {
  if (rooms.size() <= 1) return true;
  std::map<int, std::vector<int>> adj;
  for (const auto& p : passages) {
    adj[p.room_a].push_back(p.room_b);
    adj[p.room_b].push_back(p.room_a);
  }
  std::set<int> seen{rooms.front().id};
  std::vector<int> stack{rooms.front().id};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : adj[v])
      if (seen.insert(u).second) stack.push_back(u);
  }
  return seen.size() == rooms.size();
}

// ---------------------------------------------------------------------------

VoronoiSkeleton compute_voronoi(const OccupancyGrid& grid) {
  const FreeSpace fs = free_space_components(grid);
  const FeatureTransform ft = feature_transform(grid.cells);
  const int rows = grid.height();
  const int cols = grid.width();
  auto interior = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < rows && c < cols && fs.labels(r, c) > 0;
  };
  auto feature = [&](int r, int c) {
    const int idx = ft.nearest(r, c);
    return Point2d(idx % cols, idx / cols);
  };

  // Ridge anchors: neighboring free pixels whose nearest obstacle points are
  // far apart straddle the medial axis; the one closer to the bisector wins.
  Mask keep = Mask::Zero(rows, cols);
  Mask anchor = Mask::Zero(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!interior(r, c)) continue;
      keep(r, c) = 1;
      const Point2d p(c, r);
      const Point2d fp = feature(r, c);
      for (const auto& [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
        if (!interior(r + dr, c + dc)) continue;
        const Point2d q(c + dc, r + dr);
        const Point2d fq = feature(r + dr, c + dc);
        if ((fp - fq).squaredNorm() <= 4.0) continue;
        const double gap_p = (p - fq).norm() - (p - fp).norm();
        const double gap_q = (q - fp).norm() - (q - fq).norm();
        if (gap_p <= gap_q)
          anchor(r, c) = 1;
        else
          anchor(r + dr, c + dc) = 1;
      }
    }
  }
  // Components without any ridge pixel keep their deepest pixel.
  std::vector<int> best(fs.interior_count + 1, -1);
  std::vector<char> anchored(fs.interior_count + 1, 0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int l = fs.labels(r, c);
      if (l <= 0) continue;
      if (anchor(r, c)) anchored[l] = 1;
      const int idx = r * cols + c;
      if (best[l] < 0 || ft.squared_distance(r, c) > ft.squared_distance(best[l] / cols, best[l] % cols))
        best[l] = idx;
    }
  for (int l = 1; l <= fs.interior_count; ++l)
    if (!anchored[l] && best[l] >= 0) anchor(best[l] / cols, best[l] % cols) = 1;

  // Distance-ordered homotopic thinning down to the anchors.
  const auto& simple = simple_table();
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (keep(r, c) && !anchor(r, c)) queue.emplace(ft.squared_distance(r, c), r * cols + c);
  while (!queue.empty()) {
    const int idx = queue.top().second;
    queue.pop();
    const int r = idx / cols;
    const int c = idx % cols;
    if (!keep(r, c) || !simple[ring_mask(keep, r, c)]) continue;
    keep(r, c) = 0;
    for (const auto& [dr, dc] : kRing) {
      const int rr = r + dr;
      const int cc = c + dc;
      if (interior(rr, cc) && keep(rr, cc) && !anchor(rr, cc))
        queue.emplace(ft.squared_distance(rr, cc), rr * cols + cc);
    }
  }
  // Thin anchor clusters without shortening branches: drop simple pixels that
  // are not branch ends.
  for (bool changed = true; changed;) {
    changed = false;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (!keep(r, c)) continue;
        const unsigned m = ring_mask(keep, r, c);
        if (std::bitset<8>(m).count() >= 2 && simple[m]) {
          keep(r, c) = 0;
          changed = true;
        }
      }
  }

  VoronoiSkeleton skel;
  skel.transform = grid.transform;
  LabelImage index = LabelImage::Constant(rows, cols, -1);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (keep(r, c)) {
        index(r, c) = static_cast<int>(skel.vertices.size());
        skel.vertices.push_back(
            {Eigen::Vector2i(c, r), std::sqrt(ft.squared_distance(r, c)) * grid.transform.resolution});
      }
  auto in_skel = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < rows && c < cols && keep(r, c);
  };
  for (const auto& v : skel.vertices) {
    const int r = v.pixel.y();
    const int c = v.pixel.x();
    for (const auto& [dr, dc] : {std::pair{0, 1}, std::pair{1, -1}, std::pair{1, 0}, std::pair{1, 1}}) {
      if (!in_skel(r + dr, c + dc)) continue;
      // A diagonal step is redundant when a 4-path already joins the pair.
      if (dr != 0 && dc != 0 && (in_skel(r + dr, c) || in_skel(r, c + dc))) continue;
      const int a = index(r, c);
      const int b = index(r + dr, c + dc);
      skel.edges.push_back({a, b, std::min(skel.vertices[a].clearance, skel.vertices[b].clearance)});
    }
  }
  return skel;
}

VoronoiSkeleton extract_skeleton(const VoronoiSkeleton& vd, double prune_clearance) {
  const std::size_t n = vd.vertices.size();
  std::vector<char> alive(n, 1);
  const auto adj = vd.adjacency();
  auto degree = [&](int v) {
    int d = 0;
    for (int u : adj[v]) d += alive[u];
    return d;
  };

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<int> doomed;
    for (std::size_t s = 0; s < n; ++s) {
      if (!alive[s] || degree(static_cast<int>(s)) != 1) continue;
      if (vd.vertices[s].clearance >= prune_clearance) continue;
      std::vector<int> branch{static_cast<int>(s)};
      int prev = -1;
      int cur = static_cast<int>(s);
      bool reached_junction = false;
      while (true) {
        int next = -1;
        for (int u : adj[cur])
          if (alive[u] && u != prev) {
            next = u;
            break;
          }
        if (next < 0) break;  // cur is the other end of a bare path
        const int d = degree(next);
        if (d >= 3) {
          reached_junction = true;
          break;
        }
        if (d == 1) break;
        branch.push_back(next);
        prev = cur;
        cur = next;
      }
      if (reached_junction) doomed.insert(doomed.end(), branch.begin(), branch.end());
    }
    for (int v : doomed) {
      if (alive[v]) changed = true;
      alive[v] = 0;
    }
  }

  VoronoiSkeleton out;
  out.transform = vd.transform;
  std::vector<int> remap(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) {
      remap[i] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(vd.vertices[i]);
    }
  for (const auto& e : vd.edges)
    if (alive[e.a] && alive[e.b]) out.edges.push_back({remap[e.a], remap[e.b], e.min_clearance});
  return out;
}

// ---------------------------------------------------------------------------

Segmentation alpha_shape_segment(const VoronoiSkeleton& skel, const OccupancyGrid& grid,
                                 const SegmentationParams& params) {
  params.validate();
  const FreeSpace fs = free_space_components(grid);
  const FeatureTransform ft = feature_transform(grid.cells);
  const int rows = grid.height();
  const int cols = grid.width();
  auto interior = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < rows && c < cols && fs.labels(r, c) > 0;
  };
  auto feature = [&](int r, int c) {
    const int idx = ft.nearest(r, c);
    return Eigen::Vector2i(idx % cols, idx / cols);
  };

  // Superlevel-set filtration of clearance: every merge of two basins is a
  // saddle whose depth is the lower peak minus the saddle clearance.
  const std::size_t n = skel.vertices.size();
  const auto adj = skel.adjacency();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ca = skel.vertices[a].clearance;
    const double cb = skel.vertices[b].clearance;
    return ca > cb || (ca == cb && a < b);
  });
  UnionFind uf(n);
  std::vector<char> active(n, 0);
  std::vector<double> saddle_depth(n, -1.0);
  for (int v : order) {
    const double c = skel.vertices[v].clearance;
    active[v] = 1;
    uf.peak[v] = c;
    std::vector<int> roots;
    for (int u : adj[v])
      if (active[u]) roots.push_back(uf.find(u));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    if (roots.size() >= 2) {
      std::sort(roots.begin(), roots.end(), [&](int a, int b) { return uf.peak[a] > uf.peak[b]; });
      for (std::size_t i = 1; i < roots.size(); ++i)
        saddle_depth[v] = std::max(saddle_depth[v], uf.peak[roots[i]] - c);
    }
    for (int r : roots) {
      uf.parent[r] = v;
      uf.peak[v] = std::max(uf.peak[v], uf.peak[r]);
    }
  }

  std::vector<DoorChord> candidates;
  for (std::size_t v = 0; v < n; ++v) {
    const double c = skel.vertices[v].clearance;
    if (saddle_depth[v] < params.alpha / 4.0 || 2.0 * c > params.door_max_width) continue;
    const Eigen::Vector2i p = skel.vertices[v].pixel;
    const Eigen::Vector2i f1 = feature(p.y(), p.x());
    const Eigen::Vector2d u = (f1 - p).cast<double>();
    double best_cos = -0.5;
    std::optional<Eigen::Vector2i> f2;
    for (int dr = -2; dr <= 2; ++dr)
      for (int dc = -2; dc <= 2; ++dc) {
        if (!interior(p.y() + dr, p.x() + dc)) continue;
        const Eigen::Vector2i fq = feature(p.y() + dr, p.x() + dc);
        const Eigen::Vector2d w = (fq - p).cast<double>();
        const double cosang = u.dot(w) / (u.norm() * w.norm());
        if (cosang <= best_cos) {
          best_cos = cosang;
          f2 = fq;
        }
      }
    if (!f2) continue;
    candidates.push_back({f1, *f2, p, c, saddle_depth[v]});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const DoorChord& a, const DoorChord& b) {
    return a.length_px() < b.length_px();
  });
  std::vector<DoorChord> accepted;
  for (const auto& cand : candidates) {
    bool clash = false;
    for (const auto& acc : accepted)
      if (segment_distance(cand.a.cast<double>(), cand.b.cast<double>(), acc.a.cast<double>(),
                           acc.b.cast<double>()) <= 2.0) {
        clash = true;
        break;
      }
    if (!clash) accepted.push_back(cand);
  }

  // Cut along the chords, drop the ones that separate nothing, relabel.
  std::vector<std::vector<Eigen::Vector2i>> cut_pixels;
  for (const auto& ch : accepted) {
    std::vector<Eigen::Vector2i> px;
    for (const auto& q : bresenham(ch.a, ch.b))
      if (interior(q.y(), q.x())) px.push_back(q);
    cut_pixels.push_back(std::move(px));
  }
  Mask cut = Mask::Zero(rows, cols);
  Components comps;
  auto relabel = [&] {
    cut.setZero();
    for (const auto& px : cut_pixels)
      for (const auto& q : px) cut(q.y(), q.x()) = 1;
    Mask region = Mask::Zero(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) region(r, c) = interior(r, c) && !cut(r, c);
    comps = label_components(region, 4);
  };
  relabel();
  std::vector<char> keep_chord(accepted.size(), 1);
  bool dropped = false;
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    std::set<int> touching;
    for (const auto& q : cut_pixels[k])
      for (const auto& [dr, dc] : {std::pair{0, 1}, std::pair{0, -1}, std::pair{1, 0}, std::pair{-1, 0}}) {
        const int r = q.y() + dr;
        const int c = q.x() + dc;
        if (r >= 0 && c >= 0 && r < rows && c < cols && comps.labels(r, c) >= 0)
          touching.insert(comps.labels(r, c));
      }
    if (touching.size() < 2) {
      keep_chord[k] = 0;
      dropped = true;
    }
  }
  if (dropped) {
    std::vector<DoorChord> kept;
    std::vector<std::vector<Eigen::Vector2i>> kept_px;
    for (std::size_t k = 0; k < accepted.size(); ++k)
      if (keep_chord[k]) {
        kept.push_back(accepted[k]);
        kept_px.push_back(cut_pixels[k]);
      }
    accepted = std::move(kept);
    cut_pixels = std::move(kept_px);
    relabel();
  }

  // Cut pixels join the lowest-labelled neighbouring region, wave by wave.
  LabelImage labels = comps.labels;
  for (bool changed = true; changed;) {
    changed = false;
    const LabelImage snapshot = labels;
    for (const auto& px : cut_pixels)
      for (const auto& q : px) {
        if (snapshot(q.y(), q.x()) >= 0) continue;
        int best_label = -1;
        for (const auto& [dr, dc] : {std::pair{0, 1}, std::pair{0, -1}, std::pair{1, 0}, std::pair{-1, 0}}) {
          const int r = q.y() + dr;
          const int c = q.x() + dc;
          if (r < 0 || c < 0 || r >= rows || c >= cols) continue;
          const int l = snapshot(r, c);
          if (l >= 0 && (best_label < 0 || l < best_label)) best_label = l;
        }
        if (best_label >= 0) {
          labels(q.y(), q.x()) = best_label;
          changed = true;
        }
      }
  }

  Segmentation seg;
  seg.labels = std::move(labels);
  seg.count = comps.count;
  seg.chords = std::move(accepted);
  seg.transform = grid.transform;
  return seg;
}

// ---------------------------------------------------------------------------

std::vector<Eigen::Vector2d> trace_region(const LabelImage& labels, int label) {
  const int rows = static_cast<int>(labels.rows());
  const int cols = static_cast<int>(labels.cols());
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < cols && y < rows && labels(y, x) == label;
  };
  int sx = -1, sy = -1;
  for (int r = 0; r < rows && sx < 0; ++r)
    for (int c = 0; c < cols; ++c)
      if (labels(r, c) == label) {
        sx = c;
        sy = r;
        break;
      }
  std::vector<Eigen::Vector2d> corners;
  if (sx < 0) return corners;

  // Directions: E, N, W, S (y grows with row).
  constexpr int kDx[4] = {1, 0, -1, 0};
  constexpr int kDy[4] = {0, 1, 0, -1};
  int x = sx, y = sy, dir = 0;
  std::vector<Eigen::Vector2i> lattice;
  do {
    lattice.emplace_back(x, y);
    x += kDx[dir];
    y += kDy[dir];
    // Pixels ahead of the corner, left and right of the current heading.
    // Pixel (c, r) occupies [c, c+1] x [r, r+1] in corner coordinates.
    const int lx = x + (kDx[dir] - kDy[dir] - 1) / 2;
    const int ly = y + (kDy[dir] + kDx[dir] - 1) / 2;
    const int rx = x + (kDx[dir] + kDy[dir] - 1) / 2;
    const int ry = y + (kDy[dir] - kDx[dir] - 1) / 2;
    const bool left = inside(lx, ly);
    const bool right = inside(rx, ry);
    if (left && right)
      dir = (dir + 3) % 4;
    else if (!left)
      dir = (dir + 1) % 4;
  } while (!(x == sx && y == sy && dir == 0));

  // A corner visited twice is a diagonal pinch; nudge each visit inward so
  // the outline stays simple.
  std::map<Eigen::Vector2i, int, CornerLess> visits;
  for (const auto& p : lattice) ++visits[p];
  const std::size_t n = lattice.size();
  corners.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d p = lattice[i].cast<double>();
    if (visits[lattice[i]] > 1) {
      const Eigen::Vector2d din = (lattice[i] - lattice[(i + n - 1) % n]).cast<double>();
      const Eigen::Vector2d dout = (lattice[(i + 1) % n] - lattice[i]).cast<double>();
      const Eigen::Vector2d inward = Eigen::Vector2d(-din.y(), din.x()) + Eigen::Vector2d(-dout.y(), dout.x());
      if (inward.norm() > 0) p += 1e-3 * inward.normalized();
    }
    corners.push_back(p);
  }
  return corners;
}

AreaGraph build_area_graph(const Segmentation& seg, const OccupancyGrid& grid) {
  if (seg.count < 1) throw SegmentationBug("segmentation produced no regions");
  AreaGraph graph;
  graph.transform = seg.transform;
  const GridTransform& t = seg.transform;
  auto to_world = [&](const Eigen::Vector2d& corner) {
    return t.pixel_to_world(corner.x() - 0.5, corner.y() - 0.5);
  };

  for (int k = 0; k < seg.count; ++k) {
    RoomArea room;
    room.id = k + 1;
    for (const auto& c : trace_region(seg.labels, k)) room.polygon.push_back(to_world(c));
    graph.rooms.push_back(std::move(room));
  }

  // Shared pixel edges between two regions, grouped by region pair.
  const int rows = static_cast<int>(seg.labels.rows());
  const int cols = static_cast<int>(seg.labels.cols());
  using Corner = Eigen::Vector2i;
  std::map<std::pair<int, int>, std::map<Corner, std::vector<Corner>, CornerLess>> shared;
  auto add_edge = [&](int a, int b, const Corner& p, const Corner& q) {
    auto& g = shared[{std::min(a, b), std::max(a, b)}];
    g[p].push_back(q);
    g[q].push_back(p);
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int a = seg.labels(r, c);
      if (a < 0) continue;
      if (c + 1 < cols) {
        const int b = seg.labels(r, c + 1);
        if (b >= 0 && b != a) add_edge(a, b, Corner(c + 1, r), Corner(c + 1, r + 1));
      }
      if (r + 1 < rows) {
        const int b = seg.labels(r + 1, c);
        if (b >= 0 && b != a) add_edge(a, b, Corner(c, r + 1), Corner(c + 1, r + 1));
      }
    }

  int next_id = 1;
  for (const auto& [pair, corners] : shared) {
    std::set<Corner, CornerLess> seen;
    for (const auto& [start, _] : corners) {
      if (seen.count(start)) continue;
      std::vector<Corner> chain_ends;
      std::vector<Corner> stack{start};
      seen.insert(start);
      while (!stack.empty()) {
        const Corner v = stack.back();
        stack.pop_back();
        const auto& nb = corners.at(v);
        if (nb.size() % 2 == 1) chain_ends.push_back(v);
        for (const auto& u : nb)
          if (seen.insert(u).second) stack.push_back(u);
      }
      if (chain_ends.size() < 2) continue;  // closed loop: an enclosed region
      std::sort(chain_ends.begin(), chain_ends.end(), CornerLess());
      Corner e0 = chain_ends.front(), e1 = chain_ends.back();
      double best = -1.0;
      for (std::size_t i = 0; i < chain_ends.size(); ++i)
        for (std::size_t j = i + 1; j < chain_ends.size(); ++j) {
          const double d = (chain_ends[i] - chain_ends[j]).cast<double>().squaredNorm();
          if (d > best) {
            best = d;
            e0 = chain_ends[i];
            e1 = chain_ends[j];
          }
        }
      Passage p;
      p.id = next_id++;
      p.room_a = pair.first + 1;
      p.room_b = pair.second + 1;
      p.endpoints = {to_world(e0.cast<double>()), to_world(e1.cast<double>())};
      graph.passages.push_back(p);
    }
  }

  InvariantOptions opt;
  opt.resolution = t.resolution;
  const FreeSpace fs = free_space_components(grid);
  opt.interior_free_area = double((fs.labels > 0).count()) * t.resolution * t.resolution;
  const auto violations = check_area_graph(graph, opt);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << violations.size() << " area graph invariant violation(s): " << violations.front();
    throw SegmentationBug(msg.str());
  }
  return graph;
}

std::vector<std::string> check_area_graph(const AreaGraph& graph, const InvariantOptions& opt) {
  std::vector<std::string> out;
  const double res = opt.resolution;
  double total = 0.0;
  std::set<int> ids;
  for (const auto& room : graph.rooms) {
    const std::string tag = "room " + std::to_string(room.id);
    if (!ids.insert(room.id).second) out.push_back(tag + ": duplicate id");
    if (room.polygon.size() < 3) {
      out.push_back(tag + ": fewer than 3 vertices");
      continue;
    }
    if (signed_area(room.polygon) <= 0.0) out.push_back(tag + ": not counter-clockwise");
    if (!is_simple(room.polygon)) out.push_back(tag + ": polygon not simple");
    total += room.area_m2();
  }
  for (std::size_t i = 0; i < graph.rooms.size(); ++i)
    for (std::size_t j = i + 1; j < graph.rooms.size(); ++j) {
      const double overlap = intersection_area(graph.rooms[i].polygon, graph.rooms[j].polygon);
      if (overlap >= res * res)
        out.push_back("rooms " + std::to_string(graph.rooms[i].id) + " and " +
                      std::to_string(graph.rooms[j].id) + " overlap by " + std::to_string(overlap) +
                      " m2");
    }
  for (const auto& p : graph.passages) {
    const std::string tag = "passage " + std::to_string(p.id);
    if (p.room_a == p.room_b) {
      out.push_back(tag + ": connects a room to itself");
      continue;
    }
    const RoomArea* a = graph.find_room(p.room_a);
    const RoomArea* b = graph.find_room(p.room_b);
    if (!a || !b) {
      out.push_back(tag + ": references a missing room");
      continue;
    }
    for (const auto& e : p.endpoints)
      for (const RoomArea* r : {a, b})
        if (boundary_distance(e, r->polygon) > 2.0 * res)
          out.push_back(tag + ": endpoint off the boundary of room " + std::to_string(r->id));
  }
  if (opt.interior_free_area && *opt.interior_free_area > 0.0) {
    const double ratio = total / *opt.interior_free_area;
    if (ratio < 0.99 || ratio > 1.01)
      out.push_back("coverage " + std::to_string(ratio) + " outside [0.99, 1.01]");
  }
  return out;
}

}  // namespace cad2osm
