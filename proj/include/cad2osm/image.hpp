#pragma once

// Binary and label rasters plus the exact Euclidean feature transform that
// the morphology and the Voronoi skeleton are built on. Rasters are indexed
// (row, col); row grows with world y.

#include <Eigen/Core>

#include <cstdint>

namespace cad2osm {

using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelImage = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DistanceImage = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Exact squared Euclidean distance (in pixels²) from every cell to the
/// nearest nonzero cell of `sites`, plus that site's linear index
/// (row * cols + col). Cells get +inf / -1 when there are no sites.
struct FeatureTransform {
  DistanceImage squared_distance;
  LabelImage nearest;
};

FeatureTransform feature_transform(const Mask& sites);

struct Components {
  LabelImage labels;  // -1 outside the mask, otherwise 0..count-1
  int count = 0;
};

/// Connected components of the nonzero cells; connectivity is 4 or 8.
/// Labels follow row-major order of each component's first cell.
Components label_components(const Mask& mask, int connectivity);

}  // namespace cad2osm
