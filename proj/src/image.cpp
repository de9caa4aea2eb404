#include "cad2osm/image.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace cad2osm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along one row,
// tracking which parabola wins at every x.
void envelope_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& arg,
                 std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    std::fill(arg.begin(), arg.end(), -1);
    return;
  }
  int j = 0;
  for (int x = 0; x < n; ++x) {
    while (z[j + 1] < x) ++j;
    const double dx = double(x) - v[j];
    d[x] = dx * dx + f[v[j]];
    arg[x] = v[j];
  }
}

}  // namespace

FeatureTransform feature_transform(const Mask& sites) {
  const int rows = static_cast<int>(sites.rows());
  const int cols = static_cast<int>(sites.cols());
  FeatureTransform out;
  out.squared_distance.setConstant(rows, cols, kInf);
  out.nearest.setConstant(rows, cols, -1);
  if (rows == 0 || cols == 0) return out;

  // Column pass: vertical distance to the nearest site in the same column.
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> site_row(rows, cols);
  for (int c = 0; c < cols; ++c) {
    int last = -1;
    for (int r = 0; r < rows; ++r) {
      if (sites(r, c)) last = r;
      site_row(r, c) = last;
    }
    last = -1;
    for (int r = rows - 1; r >= 0; --r) {
      if (sites(r, c)) last = r;
      if (last >= 0 && (site_row(r, c) < 0 || last - r < r - site_row(r, c)))
        site_row(r, c) = last;
    }
  }

  // Row pass: exact 2D distance from the lower envelope over columns.
  std::vector<double> f(cols), d(cols), z(cols + 1);
  std::vector<int> arg(cols), v(cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int sr = site_row(r, c);
      f[c] = sr < 0 ? kInf : double(sr - r) * double(sr - r);
    }
    envelope_1d(f, d, arg, v, z);
    for (int c = 0; c < cols; ++c) {
      out.squared_distance(r, c) = d[c];
      out.nearest(r, c) = arg[c] < 0 ? -1 : site_row(r, arg[c]) * cols + arg[c];
    }
  }
  return out;
}

Components label_components(const Mask& mask, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("connectivity must be 4 or 8");
  const int rows = static_cast<int>(mask.rows());
  const int cols = static_cast<int>(mask.cols());
  Components out;
  out.labels.setConstant(rows, cols, -1);
  std::vector<int> stack;
  static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
  for (int r0 = 0; r0 < rows; ++r0) {
    for (int c0 = 0; c0 < cols; ++c0) {
      if (!mask(r0, c0) || out.labels(r0, c0) >= 0) continue;
      const int label = out.count++;
      out.labels(r0, c0) = label;
      stack.assign(1, r0 * cols + c0);
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int r = idx / cols;
        const int c = idx % cols;
        for (int k = 0; k < connectivity; ++k) {
          const int nr = r + kDr[k];
          const int nc = c + kDc[k];
          if (nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
          if (!mask(nr, nc) || out.labels(nr, nc) >= 0) continue;
          out.labels(nr, nc) = label;
          stack.push_back(nr * cols + nc);
        }
      }
    }
  }
  return out;
}

}  // namespace cad2osm
