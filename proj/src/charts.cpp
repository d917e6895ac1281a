#include "pscforge/charts.hpp"

#include <cmath>
#include <vector>

#include "pscforge/errors.hpp"

namespace pscforge::charts {

namespace {

constexpr double kAngleLo = 0.3;
const double kAngleHi = 3.14159265358979323846 - 0.3;

// Diagonal round-metric components of S^m in nested spherical angles:
// comp[i] = prod_{j<i} sin^2(theta_j).
void sphere_components(int m, const double* angles, double* comp) {
  double acc = 1.0;
  for (int i = 0; i < m; ++i) {
    comp[i] = acc;
    const double s = std::sin(angles[i]);
    acc *= s * s;
  }
}

void fill_zero(double* g, int d) {
  for (int i = 0; i < d * d; ++i) g[i] = 0.0;
}

}  // namespace

oracle::ChartMetricField sphere_chart(int n, double radius) {
  if (n < 2) throw DomainError("sphere_chart: need n >= 2");
  if (!(radius > 0.0)) throw DomainError("sphere_chart: radius must be positive");
  oracle::ChartMetricField chart;
  chart.dim = n;
  chart.lo.assign(static_cast<std::size_t>(n), kAngleLo);
  chart.hi.assign(static_cast<std::size_t>(n), kAngleHi);
  const double r2 = radius * radius;
  chart.eval = [n, r2](const double* x, double* g) {
    fill_zero(g, n);
    std::vector<double> comp(static_cast<std::size_t>(n));
    sphere_components(n, x, comp.data());
    for (int i = 0; i < n; ++i) g[i * n + i] = r2 * comp[static_cast<std::size_t>(i)];
  };
  return chart;
}

oracle::ChartMetricField single_warped_chart(
    const curvature::SingleWarpedMetric& m, double t_lo, double t_hi) {
  if (m.k < 2) throw DomainError("single_warped_chart: need k >= 2");
  const int d = m.k;
  oracle::ChartMetricField chart;
  chart.dim = d;
  chart.lo.assign(static_cast<std::size_t>(d), kAngleLo);
  chart.hi.assign(static_cast<std::size_t>(d), kAngleHi);
  chart.lo[0] = t_lo;
  chart.hi[0] = t_hi;
  const auto profile = m.profile;
  chart.eval = [d, profile](const double* x, double* g) {
    fill_zero(g, d);
    g[0] = 1.0;
    const double rho = profile.eval(x[0], 0);
    const double rho2 = rho * rho;
    std::vector<double> comp(static_cast<std::size_t>(d - 1));
    sphere_components(d - 1, x + 1, comp.data());
    for (int i = 1; i < d; ++i)
      g[i * d + i] = rho2 * comp[static_cast<std::size_t>(i - 1)];
  };
  return chart;
}

oracle::ChartMetricField doubly_warped_chart(
    const curvature::DoublyWarpedMetric& m, double t_lo, double t_hi) {
  if (m.p < 1 || m.q < 1)
    throw DomainError("doubly_warped_chart: need p, q >= 1");
  const int d = m.p + m.q + 1;
  oracle::ChartMetricField chart;
  chart.dim = d;
  chart.lo.assign(static_cast<std::size_t>(d), kAngleLo);
  chart.hi.assign(static_cast<std::size_t>(d), kAngleHi);
  chart.lo[0] = t_lo;
  chart.hi[0] = t_hi;
  const auto pa = m.a;
  const auto pb = m.b;
  const int p = m.p, q = m.q;
  chart.eval = [d, p, q, pa, pb](const double* x, double* g) {
    fill_zero(g, d);
    g[0] = 1.0;
    const double a = pa.eval(x[0], 0);
    const double b = pb.eval(x[0], 0);
    std::vector<double> comp(static_cast<std::size_t>(std::max(p, q)));
    sphere_components(p, x + 1, comp.data());
    for (int i = 0; i < p; ++i) {
      const int c = 1 + i;
      g[c * d + c] = a * a * comp[static_cast<std::size_t>(i)];
    }
    sphere_components(q, x + 1 + p, comp.data());
    for (int i = 0; i < q; ++i) {
      const int c = 1 + p + i;
      g[c * d + c] = b * b * comp[static_cast<std::size_t>(i)];
    }
  };
  return chart;
}

oracle::ChartMetricField product_chart(const curvature::ProductMetric& m,
                                       double t1_lo, double t1_hi,
                                       double t2_lo, double t2_hi) {
  if (m.f1.k < 2 || m.f2.k < 2)
    throw DomainError("product_chart: factors need k >= 2");
  const int d1 = m.f1.k, d2 = m.f2.k, d = d1 + d2;
  oracle::ChartMetricField chart;
  chart.dim = d;
  chart.lo.assign(static_cast<std::size_t>(d), kAngleLo);
  chart.hi.assign(static_cast<std::size_t>(d), kAngleHi);
  chart.lo[0] = t1_lo;
  chart.hi[0] = t1_hi;
  chart.lo[static_cast<std::size_t>(d1)] = t2_lo;
  chart.hi[static_cast<std::size_t>(d1)] = t2_hi;
  const auto p1 = m.f1.profile;
  const auto p2 = m.f2.profile;
  chart.eval = [d, d1, d2, p1, p2](const double* x, double* g) {
    fill_zero(g, d);
    g[0] = 1.0;
    const double r1 = p1.eval(x[0], 0);
    std::vector<double> comp(static_cast<std::size_t>(std::max(d1, d2)));
    sphere_components(d1 - 1, x + 1, comp.data());
    for (int i = 1; i < d1; ++i)
      g[i * d + i] = r1 * r1 * comp[static_cast<std::size_t>(i - 1)];
    const int o = d1;
    g[o * d + o] = 1.0;
    const double r2 = p2.eval(x[o], 0);
    sphere_components(d2 - 1, x + o + 1, comp.data());
    for (int i = 1; i < d2; ++i) {
      const int c = o + i;
      g[c * d + c] = r2 * r2 * comp[static_cast<std::size_t>(i - 1)];
    }
  };
  return chart;
}

oracle::ChartMetricField biwarped_chart(
    int p, int q, std::function<double(double, double)> a,
    std::function<double(double, double)> b, double t_lo, double t_hi,
    double r_lo, double r_hi) {
  if (p < 1 || q < 1) throw DomainError("biwarped_chart: need p, q >= 1");
  const int d = p + q + 2;
  oracle::ChartMetricField chart;
  chart.dim = d;
  chart.lo.assign(static_cast<std::size_t>(d), kAngleLo);
  chart.hi.assign(static_cast<std::size_t>(d), kAngleHi);
  chart.lo[0] = t_lo;
  chart.hi[0] = t_hi;
  chart.lo[1] = r_lo;
  chart.hi[1] = r_hi;
  chart.eval = [d, p, q, a, b](const double* x, double* g) {
    fill_zero(g, d);
    g[0] = 1.0;
    g[d + 1] = 1.0;
    const double av = a(x[0], x[1]);
    const double bv = b(x[0], x[1]);
    std::vector<double> comp(static_cast<std::size_t>(std::max(p, q)));
    sphere_components(p, x + 2, comp.data());
    for (int i = 0; i < p; ++i) {
      const int c = 2 + i;
      g[c * d + c] = av * av * comp[static_cast<std::size_t>(i)];
    }
    sphere_components(q, x + 2 + p, comp.data());
    for (int i = 0; i < q; ++i) {
      const int c = 2 + p + i;
      g[c * d + c] = bv * bv * comp[static_cast<std::size_t>(i)];
    }
  };
  return chart;
}

std::vector<double> chart_center(const oracle::ChartMetricField& chart) {
  std::vector<double> x(static_cast<std::size_t>(chart.dim));
  for (int i = 0; i < chart.dim; ++i)
    x[static_cast<std::size_t>(i)] =
        0.5 * (chart.lo[static_cast<std::size_t>(i)] +
               chart.hi[static_cast<std::size_t>(i)]);
  return x;
}

}  // namespace pscforge::charts
