#pragma once

#include <functional>
#include <vector>

namespace pscforge::oracle {

// Coordinate-chart presentation of a metric: a box in R^dim and a component
// evaluator filling the dim x dim matrix g (row-major). The evaluator must
// produce a symmetric positive-definite matrix at every stencil point.
struct ChartMetricField {
  int dim = 0;
  std::vector<double> lo;
  std::vector<double> hi;
  std::function<void(const double* x, double* g)> eval;

  double box_diameter() const;
};

// Default finite-difference step: 1e-3 times the box diameter.
double default_step(const ChartMetricField& chart);

// Scalar curvature by second-order central differences of the metric
// components: Christoffel symbols, then the Ricci contraction. Independent
// of any closed-form route. x must sit at distance >= 2h from the box
// boundary; the metric must be positive definite on the stencil.
double scalar(const ChartMetricField& chart, const double* x, double h);
double scalar(const ChartMetricField& chart, const std::vector<double>& x,
              double h);

}  // namespace pscforge::oracle
