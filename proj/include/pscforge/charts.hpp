#pragma once

#include <functional>

#include "pscforge/curvature.hpp"
#include "pscforge/oracle.hpp"

namespace pscforge::charts {

// Coordinate realizations of the profile-described metrics, used to feed the
// finite-difference oracle. Sphere factors use nested spherical angles; the
// default boxes keep every angle in [0.3, pi - 0.3], away from the polar
// degeneracies of the coordinates.

// Round n-sphere of the given radius, in spherical coordinates.
oracle::ChartMetricField sphere_chart(int n, double radius);

// dt^2 + rho(t)^2 ds^2_{k-1} on t in [t_lo, t_hi] (away from closures).
oracle::ChartMetricField single_warped_chart(const curvature::SingleWarpedMetric& m,
                                             double t_lo, double t_hi);

// dt^2 + a^2 ds^2_p + b^2 ds^2_q on t in [t_lo, t_hi].
oracle::ChartMetricField doubly_warped_chart(const curvature::DoublyWarpedMetric& m,
                                             double t_lo, double t_hi);

// Block product of two single-warped factors.
oracle::ChartMetricField product_chart(const curvature::ProductMetric& m,
                                       double t1_lo, double t1_hi,
                                       double t2_lo, double t2_hi);

// dt^2 + dr^2 + a(t,r)^2 ds^2_p + b(t,r)^2 ds^2_q over a rectangle in the
// flat (t, r) base.
oracle::ChartMetricField biwarped_chart(int p, int q,
                                        std::function<double(double, double)> a,
                                        std::function<double(double, double)> b,
                                        double t_lo, double t_hi, double r_lo,
                                        double r_hi);

// Box midpoint, a convenient generic evaluation point.
std::vector<double> chart_center(const oracle::ChartMetricField& chart);

}  // namespace pscforge::charts
