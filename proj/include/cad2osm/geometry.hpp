#pragma once

// Planar polygon helpers shared by every stage. Rings are stored open: the
// closing edge from back() to front() is implicit.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace cad2osm {

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Ring = std::vector<Point<Scalar>>;

using Point2d = Point<double>;
using Ring2d = Ring<double>;

inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
Scalar cross(const Point<Scalar>& a, const Point<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Shoelace area, positive for counter-clockwise rings.
template <typename Scalar>
Scalar signed_area(const Ring<Scalar>& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return Scalar(0);
  Scalar twice = 0;
  for (std::size_t i = 0; i < n; ++i)
    twice += cross<Scalar>(ring[i], ring[(i + 1) % n]);
  return twice / Scalar(2);
}

template <typename Scalar>
Scalar area(const Ring<Scalar>& ring) {
  return std::abs(signed_area(ring));
}

template <typename Scalar>
Scalar perimeter(const Ring<Scalar>& ring) {
  Scalar total = 0;
  for (std::size_t i = 0; i < ring.size(); ++i)
    total += (ring[(i + 1) % ring.size()] - ring[i]).norm();
  return total;
}

/// Area-weighted centroid; falls back to the vertex mean for degenerate rings.
template <typename Scalar>
Point<Scalar> centroid(const Ring<Scalar>& ring) {
  const std::size_t n = ring.size();
  Point<Scalar> mean = Point<Scalar>::Zero();
  for (const auto& p : ring) mean += p;
  if (n == 0) return mean;
  mean /= Scalar(n);
  // Work relative to the mean to keep large world coordinates well conditioned.
  Scalar twice = 0;
  Point<Scalar> acc = Point<Scalar>::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point<Scalar> a = ring[i] - mean;
    const Point<Scalar> b = ring[(i + 1) % n] - mean;
    const Scalar c = cross<Scalar>(a, b);
    twice += c;
    acc += (a + b) * c;
  }
  if (std::abs(twice) <= std::numeric_limits<Scalar>::epsilon()) return mean;
  return mean + acc / (Scalar(3) * twice);
}

template <typename Scalar>
Scalar point_segment_distance(const Point<Scalar>& p, const Point<Scalar>& a,
                              const Point<Scalar>& b) {
  const Point<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= Scalar(0)) return (p - a).norm();
  const Scalar t = std::clamp((p - a).dot(ab) / len2, Scalar(0), Scalar(1));
  return (p - (a + t * ab)).norm();
}

/// Minimum distance from p to the ring's boundary.
template <typename Scalar>
Scalar boundary_distance(const Point<Scalar>& p, const Ring<Scalar>& ring) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < ring.size(); ++i)
    best = std::min(best,
                    point_segment_distance<Scalar>(p, ring[i], ring[(i + 1) % ring.size()]));
  return best;
}

/// Point-in-polygon by crossing number; points on the boundary count as inside.
template <typename Scalar>
bool contains(const Ring<Scalar>& ring, const Point<Scalar>& p,
              Scalar boundary_tol = Scalar(1e-12)) {
  if (ring.size() < 3) return false;
  if (boundary_distance(p, ring) <= boundary_tol) return true;
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

namespace detail {
template <typename Scalar>
int orientation(const Point<Scalar>& a, const Point<Scalar>& b, const Point<Scalar>& c) {
  const Scalar v = cross<Scalar>(b - a, c - a);
  return (v > 0) - (v < 0);
}
template <typename Scalar>
bool on_segment(const Point<Scalar>& a, const Point<Scalar>& b, const Point<Scalar>& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}
}  // namespace detail

/// Closed-segment intersection test (touching counts).
template <typename Scalar>
bool segments_intersect(const Point<Scalar>& p1, const Point<Scalar>& p2,
                        const Point<Scalar>& q1, const Point<Scalar>& q2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

/// True when no two non-adjacent edges touch and no vertex repeats.
template <typename Scalar>
bool is_simple(const Ring<Scalar>& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a1 = ring[i];
    const auto& a2 = ring[(i + 1) % n];
    if (a1 == a2) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const auto& b1 = ring[j];
      const auto& b2 = ring[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share their common vertex; a collinear
        // fold-back is a self-overlap.
        const auto& shared = (j == i + 1) ? a2 : a1;
        const auto& other_a = (j == i + 1) ? a1 : a2;
        const auto& other_b = (j == i + 1) ? b2 : b1;
        if (detail::orientation(other_a, shared, other_b) == 0 &&
            (other_a - shared).dot(other_b - shared) > 0)
          return false;
        continue;
      }
      if (segments_intersect<Scalar>(a1, a2, b1, b2)) return false;
    }
  }
  return true;
}

/// Interior angle at vertex i of a counter-clockwise ring, in radians [0, 2pi).
template <typename Scalar>
Scalar interior_angle(const Ring<Scalar>& ring, std::size_t i) {
  const std::size_t n = ring.size();
  const Point<Scalar> to_prev = ring[(i + n - 1) % n] - ring[i];
  const Point<Scalar> to_next = ring[(i + 1) % n] - ring[i];
  // Sweep from the next edge to the previous edge counter-clockwise; for a CCW
  // ring the interior lies on that side.
  Scalar angle = std::atan2(cross<Scalar>(to_next, to_prev), to_next.dot(to_prev));
  if (angle < 0) angle += Scalar(2 * kPi);
  return angle;
}

/// Andrew's monotone chain; returns a counter-clockwise hull without
/// collinear points.
template <typename Scalar>
Ring<Scalar> convex_hull(std::vector<Point<Scalar>> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Ring<Scalar> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross<Scalar>(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross<Scalar>(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

template <typename Scalar>
void make_ccw(Ring<Scalar>& ring) {
  if (signed_area(ring) < 0) std::reverse(ring.begin(), ring.end());
}

}  // namespace cad2osm
