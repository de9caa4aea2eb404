#pragma once

// Polygon boolean operations on simple rings (Boost.Geometry underneath).

#include "cad2osm/geometry.hpp"

#include <vector>

namespace cad2osm {

double intersection_area(const Ring2d& a, const Ring2d& b);

/// Intersection over union; 0 when either ring is degenerate.
double iou(const Ring2d& a, const Ring2d& b);

/// Area of the symmetric difference.
double symmetric_difference_area(const Ring2d& a, const Ring2d& b);

/// Union of two rings as a list of outer rings (holes dropped), each CCW.
/// Touching or overlapping inputs give a single ring.
std::vector<Ring2d> union_rings(const Ring2d& a, const Ring2d& b);

/// Minimum distance between the two ring boundaries (0 if they intersect).
double ring_distance(const Ring2d& a, const Ring2d& b);

}  // namespace cad2osm
