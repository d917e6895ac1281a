#include "pscforge/morsefold.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pscforge/errors.hpp"
#include "pscforge/parallel.hpp"

namespace pscforge::morsefold {

namespace {

double int_pow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Iterates fn over the uniform grid of [-R, R]^dim with `grid` stations per
// axis, in odometer order (deterministic).
void for_each_grid_point(int dim, double radius, int grid,
                         const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
  const double step = 2.0 * radius / static_cast<double>(grid - 1);
  while (true) {
    for (int i = 0; i < dim; ++i)
      x[static_cast<std::size_t>(i)] =
          -radius + step * static_cast<double>(idx[static_cast<std::size_t>(i)]);
    fn(x);
    int digit = 0;
    while (digit < dim) {
      if (++idx[static_cast<std::size_t>(digit)] < grid) break;
      idx[static_cast<std::size_t>(digit)] = 0;
      ++digit;
    }
    if (digit == dim) break;
  }
}

void check_terms(const std::vector<MonomialTerm>& terms, int fiber_dim) {
  for (const auto& term : terms) {
    if (static_cast<int>(term.exponents.size()) != fiber_dim)
      throw DomainError(
          "fold perturbation: exponent list length must equal the fiber "
          "dimension");
    for (int e : term.exponents) {
      if (e < 0)
        throw DomainError("fold perturbation: exponents must be >= 0");
    }
  }
}

}  // namespace

double Perturbation::value(const std::vector<double>& x) const {
  double out = 0.0;
  for (const auto& term : terms) {
    double v = term.coefficient;
    for (std::size_t i = 0; i < term.exponents.size(); ++i)
      v *= int_pow(x[i], term.exponents[i]);
    out += v;
  }
  return out;
}

Eigen::VectorXd Perturbation::gradient(const std::vector<double>& x) const {
  const auto dim = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  for (const auto& term : terms) {
    for (std::size_t j = 0; j < term.exponents.size(); ++j) {
      const int ej = term.exponents[j];
      if (ej == 0) continue;
      double v = term.coefficient * static_cast<double>(ej) *
                 int_pow(x[j], ej - 1);
      for (std::size_t i = 0; i < term.exponents.size(); ++i)
        if (i != j) v *= int_pow(x[i], term.exponents[i]);
      g[static_cast<Eigen::Index>(j)] += v;
    }
  }
  return g;
}

Eigen::MatrixXd Perturbation::hessian(const std::vector<double>& x) const {
  const auto dim = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& term : terms) {
    const auto& e = term.exponents;
    for (std::size_t j = 0; j < e.size(); ++j) {
      for (std::size_t k = j; k < e.size(); ++k) {
        double v = term.coefficient;
        if (j == k) {
          if (e[j] < 2) continue;
          v *= static_cast<double>(e[j]) * static_cast<double>(e[j] - 1) *
               int_pow(x[j], e[j] - 2);
        } else {
          if (e[j] == 0 || e[k] == 0) continue;
          v *= static_cast<double>(e[j]) * static_cast<double>(e[k]) *
               int_pow(x[j], e[j] - 1) * int_pow(x[k], e[k] - 1);
        }
        for (std::size_t i = 0; i < e.size(); ++i)
          if (i != j && i != k) v *= int_pow(x[i], e[i]);
        h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) += v;
        if (j != k)
          h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) += v;
      }
    }
  }
  return h;
}

bool cubic_bound_holds(const Perturbation& P, int fiber_dim,
                       double box_radius, int grid) {
  if (fiber_dim < 1) throw DomainError("cubic bound: fiber dimension >= 1");
  if (!(box_radius > 0.0))
    throw DomainError("cubic bound: box radius must be positive");
  if (grid < 3) throw DomainError("cubic bound: grid must be >= 3");
  if (P.empty()) return true;
  bool ok = true;
  for_each_grid_point(fiber_dim, box_radius, grid,
                      [&](const std::vector<double>& x) {
                        const double s = norm(x);
                        const double lhs = std::abs(P.value(x));
                        const double rhs =
                            1.1 * P.cubic_constant * s * s * s;
                        if (lhs > rhs) ok = false;
                      });
  return ok;
}

// ---------------------------------------------------------------------------

FoldMap::FoldMap(int base_dim, int n, int lambda, double c, Perturbation P)
    : base_dim_(base_dim),
      n_(n),
      lambda_(lambda),
      c_(c),
      perturbation_(std::move(P)) {
  if (base_dim_ < 0) throw DomainError("fold map: base dimension must be >= 0");
  if (n_ < 0) throw DomainError("fold map: fiber dimension must be >= 1");
  if (lambda_ < 0 || lambda_ > n_ + 1)
    throw DomainError("fold map: index must lie in [0, n+1]");
  check_terms(perturbation_.terms, fiber_dim());
  if (!perturbation_.empty() && perturbation_.declared_cubic) {
    if (!(perturbation_.cubic_constant > 0.0))
      throw ConstructionError(
          "fold map: declared cubic perturbation needs a positive constant");
    if (!cubic_bound_holds(perturbation_, fiber_dim()))
      throw ConstructionError(
          "fold map: perturbation exceeds its declared cubic bound on the "
          "reference box");
  }
}

double FoldMap::weight(double s) const {
  if (!deformed()) return 1.0;
  return 1.0 - t_ * smoothfn::Cutoff{alpha_}(s);
}

double FoldMap::standard_value(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != fiber_dim())
    throw DomainError("fold map: fiber point has the wrong dimension");
  double v = c_;
  for (int i = 0; i < fiber_dim(); ++i) {
    const double sq = x[static_cast<std::size_t>(i)] *
                      x[static_cast<std::size_t>(i)];
    v += (i < lambda_) ? -sq : sq;
  }
  return v;
}

Eigen::VectorXd FoldMap::standard_gradient(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != fiber_dim())
    throw DomainError("fold map: fiber point has the wrong dimension");
  Eigen::VectorXd g(fiber_dim());
  for (int i = 0; i < fiber_dim(); ++i) {
    const double v = 2.0 * x[static_cast<std::size_t>(i)];
    g[i] = (i < lambda_) ? -v : v;
  }
  return g;
}

Eigen::MatrixXd FoldMap::standard_hessian() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(fiber_dim(), fiber_dim());
  for (int i = 0; i < fiber_dim(); ++i) h(i, i) = (i < lambda_) ? -2.0 : 2.0;
  return h;
}

double FoldMap::value(const std::vector<double>& x) const {
  const double std_value = standard_value(x);
  if (perturbation_.empty()) return std_value;
  return std_value + weight(norm(x)) * perturbation_.value(x);
}

Eigen::VectorXd FoldMap::fiber_gradient(const std::vector<double>& x) const {
  Eigen::VectorXd g = standard_gradient(x);
  if (perturbation_.empty()) return g;
  const double s = norm(x);
  g += weight(s) * perturbation_.gradient(x);
  if (deformed()) {
    const double dphi = smoothfn::Cutoff{alpha_}.derivative(s);
    if (dphi != 0.0) {
      const double factor = -t_ * dphi * perturbation_.value(x) / s;
      for (int i = 0; i < fiber_dim(); ++i)
        g[i] += factor * x[static_cast<std::size_t>(i)];
    }
  }
  return g;
}

Eigen::MatrixXd FoldMap::fiber_hessian(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != fiber_dim())
    throw DomainError("fold map: fiber point has the wrong dimension");
  Eigen::MatrixXd h = standard_hessian();
  if (perturbation_.empty()) return h;
  const double s = norm(x);
  h += weight(s) * perturbation_.hessian(x);
  if (deformed()) {
    const smoothfn::Cutoff phi{alpha_};
    const double dphi = phi.derivative(s);
    const double ddphi = phi.second_derivative(s);
    if (dphi != 0.0 || ddphi != 0.0) {
      Eigen::VectorXd xv(fiber_dim());
      for (int i = 0; i < fiber_dim(); ++i)
        xv[i] = x[static_cast<std::size_t>(i)];
      const Eigen::VectorXd pg = perturbation_.gradient(x);
      const double pv = perturbation_.value(x);
      const Eigen::VectorXd dw = (-t_ * dphi / s) * xv;
      h += dw * pg.transpose() + pg * dw.transpose();
      const Eigen::MatrixXd xxt = xv * xv.transpose();
      h += pv * (-t_) *
           (ddphi / (s * s) * xxt +
            dphi * (Eigen::MatrixXd::Identity(fiber_dim(), fiber_dim()) / s -
                    xxt / (s * s * s)));
    }
  }
  return h;
}

std::vector<double> FoldMap::map(const std::vector<double>& y,
                                 const std::vector<double>& x) const {
  if (static_cast<int>(y.size()) != base_dim_)
    throw DomainError("fold map: base point has the wrong dimension");
  std::vector<double> out = y;
  out.push_back(value(x));
  return out;
}

FoldMap standard_fold(int base_dim, int n, int lambda, double c) {
  return FoldMap(base_dim, n, lambda, c);
}

FoldMap deform(const FoldMap& F, double alpha, double t) {
  if (!(alpha > 0.0)) throw DomainError("deform: alpha must be positive");
  if (!(t >= 0.0 && t <= 1.0))
    throw DomainError("deform: t must lie in [0, 1]");
  if (F.deformed())
    throw DomainError("deform: the fold map already carries a deformation");
  FoldMap out = F;
  out.alpha_ = alpha;
  out.t_ = t;
  return out;
}

// ---------------------------------------------------------------------------

CriticalSet critical_set(const FoldMap& F, double box_radius, int grid) {
  if (!(box_radius > 0.0))
    throw DomainError("critical set: box radius must be positive");
  if (grid < 9) throw DomainError("critical set: grid must be >= 9 per axis");

  const int dim = F.fiber_dim();
  const double escape = 4.0 * box_radius * std::sqrt(static_cast<double>(dim));
  CriticalSet result;

  for_each_grid_point(dim, box_radius, grid, [&](const std::vector<double>& seed) {
    std::vector<double> x = seed;
    bool converged = false;
    for (int iter = 0; iter < 60; ++iter) {
      const Eigen::VectorXd g = F.fiber_gradient(x);
      if (!g.allFinite()) break;
      if (g.lpNorm<Eigen::Infinity>() <= 1e-12) {
        converged = true;
        break;
      }
      const Eigen::MatrixXd h = F.fiber_hessian(x);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
      if (!lu.isInvertible()) break;
      const Eigen::VectorXd dx = lu.solve(g);
      if (!dx.allFinite()) break;
      double moved = 0.0;
      for (int i = 0; i < dim; ++i) {
        x[static_cast<std::size_t>(i)] -= dx[i];
        moved += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      }
      if (std::sqrt(moved) > escape) break;
    }
    if (!converged) {
      ++result.dropped_seeds;
      return;
    }
    // Keep only zeros inside the box, with the certified residual.
    for (double v : x)
      if (std::abs(v) > box_radius + 1e-9) return;
    if (F.fiber_gradient(x).norm() > 1e-10) {
      ++result.dropped_seeds;
      return;
    }
    for (const auto& p : result.points) {
      double d = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double diff = p[static_cast<std::size_t>(i)] -
                            x[static_cast<std::size_t>(i)];
        d += diff * diff;
      }
      if (std::sqrt(d) < 1e-8) return;  // duplicate
    }
    result.points.push_back(x);
  });

  std::sort(result.points.begin(), result.points.end());
  return result;
}

// ---------------------------------------------------------------------------

namespace {

// Deterministic probe points with norm <= alpha (for the standard-form
// check) in addition to qualifying grid points.
std::vector<std::vector<double>> inner_probes(int dim, double alpha) {
  std::vector<std::vector<double>> pts;
  pts.emplace_back(static_cast<std::size_t>(dim), 0.0);
  for (int i = 0; i < dim; ++i) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
      x[static_cast<std::size_t>(i)] = sign * 0.5 * alpha;
      pts.push_back(std::move(x));
    }
  }
  std::vector<double> diag(static_cast<std::size_t>(dim),
                           0.5 * alpha / std::sqrt(static_cast<double>(dim)));
  pts.push_back(std::move(diag));
  return pts;
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

}  // namespace

DeformationResult verify_deformation(const FoldMap& F, double alpha,
                                     std::vector<double> t_grid,
                                     double box_radius, int grid) {
  if (F.deformed())
    throw DomainError("verify_deformation: pass the undeformed fold map");
  if (!F.perturbation().empty() && !F.perturbation().declared_cubic)
    throw DomainError(
        "verify_deformation: the perturbation must be declared cubic");
  if (!(alpha > 0.0) || alpha > box_radius)
    throw DomainError("verify_deformation: need 0 < alpha <= box radius");
  if (t_grid.empty()) t_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (double t : t_grid)
    if (!(t >= 0.0 && t <= 1.0))
      throw DomainError("verify_deformation: t samples must lie in [0, 1]");

  DeformationResult result;
  result.alpha = alpha;
  result.t_samples = t_grid;
  result.critical_sets.resize(t_grid.size());

  // Per-t critical searches are independent; the reducer below is ordered.
  parallel_for(t_grid.size(), [&](std::size_t i) {
    result.critical_sets[i] =
        critical_set(deform(F, alpha, t_grid[i]), box_radius, grid);
  });

  result.critical_set_preserved = true;
  for (const auto& cs : result.critical_sets) {
    result.dropped_seeds += cs.dropped_seeds;
    if (cs.points.size() != 1 || norm(cs.points.front()) > 1e-8)
      result.critical_set_preserved = false;
  }

  const int dim = F.fiber_dim();

  // Locality: outside radius 2*alpha every F_t coincides with F.
  result.outside_unchanged = true;
  std::vector<std::vector<double>> outer;
  for_each_grid_point(dim, box_radius, grid, [&](const std::vector<double>& x) {
    if (norm(x) >= 2.0 * alpha) outer.push_back(x);
  });
  for (double t : t_grid) {
    const FoldMap ft = deform(F, alpha, t);
    for (const auto& x : outer) {
      if (ft.value(x) != F.value(x) ||
          !same_vector(ft.fiber_gradient(x), F.fiber_gradient(x)))
        result.outside_unchanged = false;
    }
  }

  // Standard form: at t = 1 inside radius alpha, F_1 equals the quadratic.
  result.standard_near_fold = true;
  const FoldMap f1 = deform(F, alpha, 1.0);
  std::vector<std::vector<double>> inner = inner_probes(dim, alpha);
  for_each_grid_point(dim, box_radius, grid, [&](const std::vector<double>& x) {
    if (norm(x) <= alpha) inner.push_back(x);
  });
  for (const auto& x : inner) {
    if (f1.value(x) != F.standard_value(x) ||
        !same_vector(f1.fiber_gradient(x), F.standard_gradient(x)))
      result.standard_near_fold = false;
  }

  // Hessian rigidity at the origin, exact for every t.
  result.hessian_match = true;
  const Eigen::MatrixXd target = F.standard_hessian();
  const std::vector<double> origin(static_cast<std::size_t>(dim), 0.0);
  for (double t : t_grid) {
    if (!same_matrix(deform(F, alpha, t).fiber_hessian(origin), target))
      result.hessian_match = false;
  }
  if (!same_matrix(f1.fiber_hessian(origin), target))
    result.hessian_match = false;

  return result;
}

double alpha_bound(const FoldMap& F, double box_radius) {
  if (!(box_radius > 0.0))
    throw DomainError("alpha_bound: box radius must be positive");
  double alpha = box_radius;
  for (int halving = 0; halving < 20; ++halving) {
    alpha *= 0.5;
    if (verify_deformation(F, alpha, {}, box_radius).ok()) return alpha;
  }
  throw NoValidAlpha(
      "alpha_bound: no dyadic alpha certified the deformation; the "
      "perturbation is not cubic-dominated on the box");
}

GradientBound gradient_quadratic_bound(const FoldMap& F, double alpha,
                                       double box_radius, int grid) {
  if (!(alpha > 0.0))
    throw DomainError("gradient bound: alpha must be positive");
  if (grid < 3) throw DomainError("gradient bound: grid must be >= 3");
  const int dim = F.fiber_dim();
  const Perturbation& P = F.perturbation();

  GradientBound out;
  out.ceiling = 3.0 * P.cubic_constant +
                10.0 * P.cubic_constant *
                    std::sqrt(static_cast<double>(dim)) * box_radius / alpha;
  if (P.empty()) return out;

  const smoothfn::Cutoff phi{alpha};
  for_each_grid_point(dim, box_radius, grid, [&](const std::vector<double>& x) {
    const double s = norm(x);
    if (s == 0.0) return;
    Eigen::VectorXd g = (1.0 - phi(s)) * P.gradient(x);
    const double dphi = phi.derivative(s);
    if (dphi != 0.0) {
      const double factor = -dphi * P.value(x) / s;
      for (int i = 0; i < dim; ++i)
        g[i] += factor * x[static_cast<std::size_t>(i)];
    }
    out.measured = std::max(out.measured, g.norm() / (s * s));
  });
  return out;
}

// ---------------------------------------------------------------------------

bool compat_check(const MorsePair& pair, double tol) {
  const int dim = pair.fold.fiber_dim();
  const Eigen::MatrixXd& m = pair.background;
  if (m.rows() != dim || m.cols() != dim) return false;
  const std::vector<double> origin(static_cast<std::size_t>(dim), 0.0);
  const Eigen::MatrixXd h = pair.fold.fiber_hessian(origin);
  const int lambda = pair.fold.index();

  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
      const bool i_neg = i < lambda;
      const bool j_neg = j < lambda;
      if (i_neg != j_neg) {
        // Mixed block: the background must not couple the eigenspaces.
        if (std::abs(m(i, j)) > tol) return false;
      } else if (i_neg) {
        if (std::abs(h(i, j) + m(i, j)) > tol) return false;
      } else {
        if (std::abs(h(i, j) - m(i, j)) > tol) return false;
      }
    }
  }
  return true;
}

}  // namespace pscforge::morsefold
