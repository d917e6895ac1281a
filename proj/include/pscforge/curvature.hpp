#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pscforge/smoothfn.hpp"

namespace pscforge::curvature {

using smoothfn::SmoothProfile;

// Rotationally symmetric metric dt^2 + rho(t)^2 ds^2_{k-1} on a k-manifold.
struct SingleWarpedMetric {
  int k = 2;
  SmoothProfile profile;
};

// dt^2 + a(t)^2 ds^2_p + b(t)^2 ds^2_q on a (p+q+1)-manifold. A sphere
// factor with p = 0 or q = 0 contributes nothing (S^0 is discrete).
struct DoublyWarpedMetric {
  int p = 0;
  int q = 0;
  SmoothProfile a;
  SmoothProfile b;
  double domain_length() const { return a.domain_length(); }
};

// Riemannian product of two rotationally symmetric factors; the scalar
// curvature is the sum of the factor curvatures.
struct ProductMetric {
  SingleWarpedMetric f1;
  SingleWarpedMetric f2;
};

// Closed-form scalar curvature
//   R = -2 (k-1) rho''/rho + (k-1)(k-2) (1 - rho'^2) / rho^2.
// Interior t only, except that a disk-closed profile whose first piece is a
// pure sine arc evaluates at t = 0 by the analytic limit k(k-1)/delta^2.
double scalar_single_warped(const SingleWarpedMetric& m, double t);

// Closed-form scalar curvature
//   R = -2p a''/a - 2q b''/b + p(p-1)(1-a'^2)/a^2 + q(q-1)(1-b'^2)/b^2
//       - 2pq a'b'/(ab).
// Interior t only.
double scalar_doubly_warped(const DoublyWarpedMetric& m, double t);

double scalar_product(const ProductMetric& m, double t1, double t2);

struct GridSpec {
  int samples = 0;       // per radial dimension
  int radial_dims = 1;   // 1 or 2
};

struct RegionStat {
  std::string name;
  double min_scalar = 0.0;
  std::array<double, 2> argmin{0.0, 0.0};
  long nonpositive = 0;
  long count = 0;
};

// Result of a deterministic grid scan of scalar curvature. The reduction is
// block-ordered, so the report does not depend on the worker count.
struct PscReport {
  double min_scalar = 0.0;
  std::array<double, 2> argmin{0.0, 0.0};
  int argmin_dims = 1;
  long nonpositive_count = 0;
  long sample_count = 0;
  GridSpec grid;
  std::vector<RegionStat> regions;
  bool positive() const { return min_scalar > 0.0; }
};

// Grid minimum of scalar curvature; interior samples plus the analytic
// center value for disk-closed single-warped metrics. grid >= 64.
PscReport min_scan(const SingleWarpedMetric& m, int grid);
PscReport min_scan(const DoublyWarpedMetric& m, int grid);
PscReport min_scan(const ProductMetric& m, int grid);

// Rows of the scan, for CSV export: {t, R} or {t1, t2, R}.
std::vector<std::array<double, 3>> scan_rows(const SingleWarpedMetric& m, int grid);
std::vector<std::array<double, 3>> scan_rows(const ProductMetric& m, int grid);

// Generic deterministic 2D scan: value(i, j) sampled at (xs[i], ys[j]),
// region(i, j) indexing into names. Rows run in parallel; the reduction is
// row-ordered, so the result is independent of the worker count.
PscReport grid_scan_2d(const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const std::vector<std::string>& names,
                       const std::function<double(std::size_t, std::size_t)>& value,
                       const std::function<int(std::size_t, std::size_t)>& region,
                       GridSpec grid);

}  // namespace pscforge::curvature
