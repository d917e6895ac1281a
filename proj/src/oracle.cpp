#include "pscforge/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "pscforge/errors.hpp"

namespace pscforge::oracle {

double ChartMetricField::box_diameter() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
    s += d * d;
  }
  return std::sqrt(s);
}

double default_step(const ChartMetricField& chart) {
  return 1e-3 * chart.box_diameter();
}

namespace {

Eigen::MatrixXd eval_metric(const ChartMetricField& chart,
                            const std::vector<double>& x) {
  const int d = chart.dim;
  Eigen::MatrixXd g(d, d);
  chart.eval(x.data(), g.data());
  // Row- vs column-major is irrelevant: the matrix must be symmetric.
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff()))
    throw DegenerateMetricError("oracle: metric components not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw DegenerateMetricError(
        "oracle: metric not positive definite at a stencil point");
  return g;
}

}  // namespace

double scalar(const ChartMetricField& chart, const double* x, double h) {
  const int d = chart.dim;
  if (d < 2) throw DomainError("oracle: chart dimension must be >= 2");
  if (!(h > 0.0)) throw DomainError("oracle: step must be positive");
  std::vector<double> base(x, x + d);
  for (int i = 0; i < d; ++i) {
    if (base[static_cast<std::size_t>(i)] - 2.0 * h < chart.lo[static_cast<std::size_t>(i)] ||
        base[static_cast<std::size_t>(i)] + 2.0 * h > chart.hi[static_cast<std::size_t>(i)])
      throw DomainError("oracle: stencil leaves the chart box (x too close to "
                        "the boundary for step h)");
  }

  auto at = [&](int i, double si, int j, double sj) {
    std::vector<double> p = base;
    p[static_cast<std::size_t>(i)] += si * h;
    if (j >= 0) p[static_cast<std::size_t>(j)] += sj * h;
    return eval_metric(chart, p);
  };

  const Eigen::MatrixXd g0 = eval_metric(chart, base);
  Eigen::MatrixXd ginv = g0.inverse();

  // First derivatives dg[m] and pure/mixed second derivatives d2g[m][l].
  std::vector<Eigen::MatrixXd> gp(static_cast<std::size_t>(d)),
      gm(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) {
    gp[static_cast<std::size_t>(m)] = at(m, +1.0, -1, 0.0);
    gm[static_cast<std::size_t>(m)] = at(m, -1.0, -1, 0.0);
  }
  std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m)
    dg[static_cast<std::size_t>(m)] =
        (gp[static_cast<std::size_t>(m)] - gm[static_cast<std::size_t>(m)]) /
        (2.0 * h);

  std::vector<std::vector<Eigen::MatrixXd>> d2g(
      static_cast<std::size_t>(d),
      std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(d)));
  for (int m = 0; m < d; ++m) {
    d2g[static_cast<std::size_t>(m)][static_cast<std::size_t>(m)] =
        (gp[static_cast<std::size_t>(m)] - 2.0 * g0 +
         gm[static_cast<std::size_t>(m)]) /
        (h * h);
    for (int l = m + 1; l < d; ++l) {
      const Eigen::MatrixXd mixed =
          (at(m, +1.0, l, +1.0) - at(m, +1.0, l, -1.0) -
           at(m, -1.0, l, +1.0) + at(m, -1.0, l, -1.0)) /
          (4.0 * h * h);
      d2g[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] = mixed;
      d2g[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] = mixed;
    }
  }

  // Christoffel symbols Gamma[a](b,c) and their coordinate derivatives,
  // assembled analytically from dg and d2g.
  auto christoffel_lower = [&](int b, int c, int l) {
    return 0.5 * (dg[static_cast<std::size_t>(b)](l, c) +
                  dg[static_cast<std::size_t>(c)](l, b) -
                  dg[static_cast<std::size_t>(l)](b, c));
  };
  std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(d),
                                     Eigen::MatrixXd::Zero(d, d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = b; c < d; ++c) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += ginv(a, l) * christoffel_lower(b, c, l);
        gamma[static_cast<std::size_t>(a)](b, c) = s;
        gamma[static_cast<std::size_t>(a)](c, b) = s;
      }

  // d_m ginv = -ginv dg[m] ginv.
  std::vector<Eigen::MatrixXd> dginv(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m)
    dginv[static_cast<std::size_t>(m)] =
        -ginv * dg[static_cast<std::size_t>(m)] * ginv;

  auto dchristoffel = [&](int m, int a, int b, int c) {
    double s = 0.0;
    for (int l = 0; l < d; ++l) {
      const double lower2 =
          0.5 * (d2g[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)](l, c) +
                 d2g[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)](l, b) -
                 d2g[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)](b, c));
      s += dginv[static_cast<std::size_t>(m)](a, l) * christoffel_lower(b, c, l) +
           ginv(a, l) * lower2;
    }
    return s;
  };

  // Ricci: R_bc = d_a Gamma^a_bc - d_b Gamma^a_ac
  //             + Gamma^a_am Gamma^m_bc - Gamma^a_bm Gamma^m_ac.
  Eigen::MatrixXd ricci = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < d; ++b) {
    for (int c = b; c < d; ++c) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        s += dchristoffel(a, a, b, c) - dchristoffel(b, a, a, c);
        for (int m = 0; m < d; ++m) {
          s += gamma[static_cast<std::size_t>(a)](a, m) *
                   gamma[static_cast<std::size_t>(m)](b, c) -
               gamma[static_cast<std::size_t>(a)](b, m) *
                   gamma[static_cast<std::size_t>(m)](a, c);
        }
      }
      ricci(b, c) = s;
      ricci(c, b) = s;
    }
  }

  return (ginv * ricci).trace();
}

double scalar(const ChartMetricField& chart, const std::vector<double>& x,
              double h) {
  if (static_cast<int>(x.size()) != chart.dim)
    throw DomainError("oracle: point dimension mismatch");
  return scalar(chart, x.data(), h);
}

}  // namespace pscforge::oracle
