#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pscforge/smoothfn.hpp"

namespace pscforge::morsefold {

// ---------------------------------------------------------------------------
// Perturbations
// ---------------------------------------------------------------------------

// Single monomial in the fiber variables: coefficient * prod x_i^{e_i}.
struct MonomialTerm {
  std::vector<int> exponents;
  double coefficient = 0.0;
};

// Polynomial perturbation P(x). declared_cubic asserts the pointwise bound
// |P(x)| <= cubic_constant * |x|^3 on the reference box; the bound is grid
// sampled (with 10% slack) when a fold map is built around the perturbation.
struct Perturbation {
  std::vector<MonomialTerm> terms;
  bool declared_cubic = false;
  double cubic_constant = 0.0;

  bool empty() const { return terms.empty(); }
  double value(const std::vector<double>& x) const;
  Eigen::VectorXd gradient(const std::vector<double>& x) const;
  Eigen::MatrixXd hessian(const std::vector<double>& x) const;
};

// Samples |P| <= cubic_constant * |x|^3 (with 10% slack) on the grid of the
// centered box of the given radius.
bool cubic_bound_holds(const Perturbation& P, int fiber_dim,
                       double box_radius = 0.5, int grid = 9);

// ---------------------------------------------------------------------------
// Fold maps
// ---------------------------------------------------------------------------

// F(y, x) = (y, f(x)) with f = c - x_1^2 - ... - x_lambda^2
//                              + x_{lambda+1}^2 + ... + x_{n+1}^2 + P(x),
// optionally deformed: f_t = f_std + (1 - t*phi_alpha(|x|)) * P. The base
// coordinates y ride along untouched; all structure lives in the fiber.
class FoldMap {
 public:
  FoldMap(int base_dim, int n, int lambda, double c, Perturbation P = {});

  int base_dim() const { return base_dim_; }
  int n() const { return n_; }
  int fiber_dim() const { return n_ + 1; }
  int index() const { return lambda_; }
  double critical_value() const { return c_; }
  const Perturbation& perturbation() const { return perturbation_; }

  bool deformed() const { return alpha_ > 0.0; }
  double alpha() const { return alpha_; }
  double time() const { return t_; }

  // The quadratic part c - rho^2 + r^2 alone.
  double standard_value(const std::vector<double>& x) const;
  Eigen::VectorXd standard_gradient(const std::vector<double>& x) const;
  Eigen::MatrixXd standard_hessian() const;

  // Fiber value/gradient/Hessian of f (or f_t when deformed). Outside radius
  // 2*alpha the deformed evaluators agree with the undeformed ones bitwise;
  // at t = 1 inside radius alpha they agree with the standard form bitwise.
  double value(const std::vector<double>& x) const;
  Eigen::VectorXd fiber_gradient(const std::vector<double>& x) const;
  Eigen::MatrixXd fiber_hessian(const std::vector<double>& x) const;

  // Full map: (y, x) -> (y, value(x)).
  std::vector<double> map(const std::vector<double>& y,
                          const std::vector<double>& x) const;

 private:
  friend FoldMap deform(const FoldMap& F, double alpha, double t);

  // 1 - t*phi_alpha(|x|) and the cutoff pieces needed by derivatives.
  double weight(double s) const;

  int base_dim_ = 0;
  int n_ = 0;
  int lambda_ = 0;
  double c_ = 0.0;
  Perturbation perturbation_;
  double alpha_ = 0.0;  // > 0 iff deformed
  double t_ = 0.0;
};

// Unperturbed fold: exact quadratic form. Requires 0 <= lambda <= n+1.
FoldMap standard_fold(int base_dim, int n, int lambda, double c);

// The straight-line homotopy f_t: requires alpha > 0 and t in [0, 1]; the
// input must not already carry a deformation.
FoldMap deform(const FoldMap& F, double alpha, double t);

// ---------------------------------------------------------------------------
// Critical sets
// ---------------------------------------------------------------------------

struct CriticalSet {
  // Lexicographically sorted fiber points with Newton residual <= 1e-10,
  // deduplicated at distance 1e-8.
  std::vector<std::vector<double>> points;
  // Seeds whose Newton iteration failed to converge (warning, not error).
  long dropped_seeds = 0;
};

// All fiber-gradient zeros inside the centered box of the given radius,
// found by grid seeding (grid >= 9 per axis) plus Newton refinement on the
// analytic Hessian.
CriticalSet critical_set(const FoldMap& F, double box_radius, int grid = 9);

// ---------------------------------------------------------------------------
// Deformation verification
// ---------------------------------------------------------------------------

struct DeformationResult {
  double alpha = 0.0;
  std::vector<double> t_samples;
  std::vector<CriticalSet> critical_sets;  // one per t sample
  long dropped_seeds = 0;

  bool critical_set_preserved = false;  // every t: critical set == {origin}
  bool outside_unchanged = false;       // |x| >= 2*alpha: f_t == f bitwise
  bool standard_near_fold = false;      // t=1, |x| <= alpha: f_1 == f_std
  bool hessian_match = false;           // origin Hessian == diag(-2, +2) exact

  bool ok() const {
    return critical_set_preserved && outside_unchanged &&
           standard_near_fold && hessian_match;
  }
};

// Evaluates all four flags for the homotopy at the given alpha. The fold's
// perturbation must be empty or declared cubic; 0 < alpha <= box_radius.
// An empty t_grid selects {0, 1/4, 1/2, 3/4, 1}.
DeformationResult verify_deformation(const FoldMap& F, double alpha,
                                     std::vector<double> t_grid = {},
                                     double box_radius = 0.5, int grid = 9);

// Largest alpha in the dyadic descent {box/2, box/4, ..., box/2^20} whose
// verification passes all flags. Exhausting the descent raises NoValidAlpha
// (the perturbation is not cubic-dominated on the box).
double alpha_bound(const FoldMap& F, double box_radius = 0.5);

// Grid measurement of sup |grad[(1 - t*phi_alpha)*P]| / |x|^2 at t = 1,
// against the a-priori ceiling 3C + 10*C*sqrt(dim)*box_radius/alpha valid
// for degree-3 perturbations with C = sum of |coefficients|.
struct GradientBound {
  double measured = 0.0;
  double ceiling = 0.0;
  bool ok() const { return measured <= ceiling; }
};

GradientBound gradient_quadratic_bound(const FoldMap& F, double alpha,
                                       double box_radius = 0.5, int grid = 17);

// ---------------------------------------------------------------------------
// Compatible background metrics
// ---------------------------------------------------------------------------

// A fold together with a constant background metric in Morse coordinates.
struct MorsePair {
  FoldMap fold;
  Eigen::MatrixXd background;
};

// True iff the background is symmetric, block-diagonal with respect to the
// +/- eigenspace split of the fold's origin Hessian, and the Hessian equals
// -background on the negative block and +background on the positive block,
// entrywise within tol.
bool compat_check(const MorsePair& pair, double tol = 1e-12);

}  // namespace pscforge::morsefold
