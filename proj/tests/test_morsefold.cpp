#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pscforge/errors.hpp"
#include "pscforge/morsefold.hpp"
#include "pscforge/parallel.hpp"

using namespace pscforge;
using morsefold::FoldMap;
using morsefold::MonomialTerm;
using morsefold::MorsePair;
using morsefold::Perturbation;

namespace {

// a * x_1^3 on a 3-dimensional fiber, declared cubic with C = |a|.
Perturbation cubic_x1(double a) {
  return Perturbation{{MonomialTerm{{3, 0, 0}, a}}, true, std::abs(a)};
}

FoldMap fold_with(Perturbation P, int lambda = 1) {
  return FoldMap(2, 2, lambda, 0.0, std::move(P));
}

}  // namespace

TEST_CASE("standard fold is the exact quadratic form") {
  const FoldMap f = morsefold::standard_fold(2, 2, 1, 0.7);
  CHECK(f.base_dim() == 2);
  CHECK(f.fiber_dim() == 3);
  CHECK(f.index() == 1);
  CHECK(f.critical_value() == 0.7);
  CHECK_FALSE(f.deformed());

  CHECK(f.value({0.0, 0.0, 0.0}) == 0.7);
  CHECK(f.value({0.3, 0.1, -0.2}) == 0.7 - 0.09 + 0.01 + 0.04);

  const Eigen::VectorXd g0 = f.fiber_gradient({0.0, 0.0, 0.0});
  CHECK(g0.norm() == 0.0);
  const Eigen::VectorXd g = f.fiber_gradient({0.25, -0.5, 0.125});
  CHECK(g[0] == -0.5);
  CHECK(g[1] == -1.0);
  CHECK(g[2] == 0.25);

  const Eigen::MatrixXd h = f.fiber_hessian({0.1, 0.2, 0.3});
  CHECK(h(0, 0) == -2.0);
  CHECK(h(1, 1) == 2.0);
  CHECK(h(2, 2) == 2.0);
  CHECK(h(0, 1) == 0.0);

  // The full map passes base coordinates through.
  const auto image = f.map({0.3, 0.4}, {0.0, 0.0, 0.0});
  REQUIRE(image.size() == 3);
  CHECK(image[0] == 0.3);
  CHECK(image[1] == 0.4);
  CHECK(image[2] == 0.7);

  // Index may reach n+1 here; the family-level admissibility check is what
  // rejects large indices downstream.
  CHECK_NOTHROW(morsefold::standard_fold(1, 2, 3, 0.0));
  CHECK_THROWS_AS(morsefold::standard_fold(1, 2, 4, 0.0), DomainError);
  CHECK_THROWS_AS(morsefold::standard_fold(1, 2, -1, 0.0), DomainError);
  CHECK_THROWS_AS(morsefold::standard_fold(-1, 2, 1, 0.0), DomainError);
}

TEST_CASE("perturbation evaluators and validation") {
  // P = 0.5 x1^2 x3 + 2 x2 on a 3-dimensional fiber (undeclared).
  Perturbation P{{MonomialTerm{{2, 0, 1}, 0.5}, MonomialTerm{{0, 1, 0}, 2.0}},
                 false,
                 0.0};
  const std::vector<double> x{0.4, -0.3, 0.2};
  CHECK(P.value(x) == doctest::Approx(0.5 * 0.16 * 0.2 - 0.6).epsilon(1e-15));
  const Eigen::VectorXd g = P.gradient(x);
  CHECK(g[0] == doctest::Approx(0.5 * 2.0 * 0.4 * 0.2).epsilon(1e-15));
  CHECK(g[1] == 2.0);
  CHECK(g[2] == doctest::Approx(0.5 * 0.16).epsilon(1e-15));
  const Eigen::MatrixXd h = P.hessian(x);
  CHECK(h(0, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(h(0, 2) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(h(2, 0) == h(0, 2));
  CHECK(h(1, 1) == 0.0);

  // Wrong exponent arity or negative exponents are rejected at fold build.
  Perturbation bad{{MonomialTerm{{3, 0}, 1.0}}, false, 0.0};
  CHECK_THROWS_AS(fold_with(bad), DomainError);
  Perturbation neg{{MonomialTerm{{-1, 0, 0}, 1.0}}, false, 0.0};
  CHECK_THROWS_AS(fold_with(neg), DomainError);

  // Declared-cubic bound is sampled at construction.
  CHECK(morsefold::cubic_bound_holds(cubic_x1(0.3), 3));
  Perturbation tight{{MonomialTerm{{3, 0, 0}, 0.3}}, true, 0.2};
  CHECK_FALSE(morsefold::cubic_bound_holds(tight, 3));
  CHECK_THROWS_AS(fold_with(tight), ConstructionError);
  Perturbation no_constant{{MonomialTerm{{3, 0, 0}, 0.3}}, true, 0.0};
  CHECK_THROWS_AS(fold_with(no_constant), ConstructionError);
}

TEST_CASE("homotopy endpoints and locality are exact") {
  const FoldMap f = fold_with(cubic_x1(0.3));
  const double alpha = 0.1;

  const FoldMap f0 = morsefold::deform(f, alpha, 0.0);
  const FoldMap f1 = morsefold::deform(f, alpha, 1.0);
  CHECK(f1.deformed());
  CHECK(f1.alpha() == alpha);
  CHECK(f1.time() == 1.0);

  const std::vector<std::vector<double>> pts{
      {0.0, 0.0, 0.0},   {0.03, -0.02, 0.01}, {0.12, 0.05, -0.08},
      {0.3, -0.3, 0.25}, {0.45, 0.1, 0.2}};
  for (const auto& x : pts) {
    // t = 0 is the identity of the homotopy.
    CHECK(f0.value(x) == f.value(x));
    const double s = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (s <= alpha) CHECK(f1.value(x) == f.standard_value(x));
    if (s >= 2.0 * alpha) CHECK(f1.value(x) == f.value(x));
  }

  // Radius 0.5*alpha: the standard form exactly, value and gradient.
  const std::vector<double> near{0.5 * alpha, 0.0, 0.0};
  CHECK(f1.value(near) == f.standard_value(near));
  CHECK(f1.fiber_gradient(near) == f.standard_gradient(near));

  // Radius 3*alpha: the original map exactly.
  const std::vector<double> far{0.3, 0.0, 0.0};
  for (double t : {0.25, 0.6, 1.0}) {
    const FoldMap ft = morsefold::deform(f, alpha, t);
    CHECK(ft.value(far) == f.value(far));
    CHECK(ft.fiber_gradient(far) == f.fiber_gradient(far));
  }

  CHECK_THROWS_AS(morsefold::deform(f, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(morsefold::deform(f, -0.1, 0.5), DomainError);
  CHECK_THROWS_AS(morsefold::deform(f, 0.1, 1.5), DomainError);
  CHECK_THROWS_AS(morsefold::deform(f1, 0.1, 0.5), DomainError);
}

TEST_CASE("critical set detection on analytic fixtures") {
  SUBCASE("unperturbed fold has exactly the origin") {
    const auto cs =
        morsefold::critical_set(morsefold::standard_fold(2, 2, 1, 0.0), 0.5);
    REQUIRE(cs.points.size() == 1);
    CHECK(std::abs(cs.points[0][0]) <= 1e-10);
    CHECK(std::abs(cs.points[0][1]) <= 1e-10);
    CHECK(std::abs(cs.points[0][2]) <= 1e-10);
    CHECK(cs.dropped_seeds == 0);
  }

  SUBCASE("strong cubic term adds the analytic second root") {
    // grad_1 = -2 x1 + 30 x1^2 vanishes at x1 = 0 and x1 = 1/15.
    const FoldMap f = fold_with(cubic_x1(10.0));
    const auto cs = morsefold::critical_set(f, 0.5);
    REQUIRE(cs.points.size() == 2);
    CHECK(std::abs(cs.points[0][0]) <= 1e-9);
    CHECK(cs.points[1][0] == doctest::Approx(1.0 / 15.0).epsilon(1e-9));
    CHECK(std::abs(cs.points[1][1]) <= 1e-9);
    CHECK(std::abs(cs.points[1][2]) <= 1e-9);
  }

  SUBCASE("weak cubic term keeps the second root outside the box") {
    // The nonzero root 2/(3*0.3) = 20/9 lies far outside radius 0.5.
    const auto cs = morsefold::critical_set(fold_with(cubic_x1(0.3)), 0.5);
    REQUIRE(cs.points.size() == 1);
    CHECK(std::abs(cs.points[0][0]) <= 1e-10);
  }

  SUBCASE("guards") {
    const FoldMap f = morsefold::standard_fold(2, 2, 1, 0.0);
    CHECK_THROWS_AS(morsefold::critical_set(f, 0.0), DomainError);
    CHECK_THROWS_AS(morsefold::critical_set(f, 0.5, 8), DomainError);
  }
}

TEST_CASE("deformation verification flags") {
  SUBCASE("zero perturbation passes for any alpha") {
    const FoldMap f = morsefold::standard_fold(2, 2, 1, 0.0);
    for (double alpha : {0.25, 0.1, 0.03}) {
      const auto res = morsefold::verify_deformation(f, alpha);
      CHECK(res.critical_set_preserved);
      CHECK(res.outside_unchanged);
      CHECK(res.standard_near_fold);
      CHECK(res.hessian_match);
      CHECK(res.ok());
      CHECK(res.t_samples == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
      REQUIRE(res.critical_sets.size() == 5);
      for (const auto& cs : res.critical_sets)
        CHECK(cs.points.size() == 1);
    }
  }

  SUBCASE("weak cubic perturbation passes at alpha = 0.1") {
    const auto res =
        morsefold::verify_deformation(fold_with(cubic_x1(0.3)), 0.1);
    CHECK(res.ok());
    CHECK(res.alpha == 0.1);
  }

  SUBCASE("strong cubic perturbation loses critical-set preservation") {
    const auto res =
        morsefold::verify_deformation(fold_with(cubic_x1(10.0)), 0.1);
    CHECK_FALSE(res.critical_set_preserved);
    // The extra root sits at 1/15 already for the input map (t = 0).
    CHECK(res.critical_sets.front().points.size() == 2);
    CHECK(res.outside_unchanged);
    CHECK(res.standard_near_fold);
    CHECK(res.hessian_match);
    CHECK_FALSE(res.ok());
  }

  SUBCASE("origin Hessian is rigid across the homotopy") {
    const FoldMap f = fold_with(cubic_x1(0.3));
    const std::vector<double> origin{0.0, 0.0, 0.0};
    const Eigen::MatrixXd target = f.standard_hessian();
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Eigen::MatrixXd h =
          morsefold::deform(f, 0.1, t).fiber_hessian(origin);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(h(i, j) == target(i, j));
    }
  }

  SUBCASE("preconditions") {
    const FoldMap f = fold_with(cubic_x1(0.3));
    CHECK_THROWS_AS(morsefold::verify_deformation(f, 0.0), DomainError);
    CHECK_THROWS_AS(morsefold::verify_deformation(f, 0.6, {}, 0.5),
                    DomainError);
    CHECK_THROWS_AS(morsefold::verify_deformation(f, 0.1, {0.5, 1.2}),
                    DomainError);
    Perturbation undeclared{{MonomialTerm{{3, 0, 0}, 0.3}}, false, 0.0};
    CHECK_THROWS_AS(morsefold::verify_deformation(fold_with(undeclared), 0.1),
                    DomainError);
    CHECK_THROWS_AS(
        morsefold::verify_deformation(morsefold::deform(f, 0.1, 0.5), 0.1),
        DomainError);
  }
}

TEST_CASE("alpha bound descent") {
  // Zero perturbation: the first dyadic candidate box/2 passes.
  CHECK(morsefold::alpha_bound(morsefold::standard_fold(2, 2, 1, 0.0)) ==
        0.25);

  // Weak cubic: the top candidate already certifies.
  CHECK(morsefold::alpha_bound(fold_with(cubic_x1(0.3))) == 0.25);

  // Mis-declared quadratic: the origin Hessian shifts at every alpha, so the
  // descent exhausts. The declared constant is generous enough to pass the
  // sampled cubic bound (the grid cannot see x -> 0), which is exactly the
  // failure mode NoValidAlpha exists for.
  Perturbation quad{{MonomialTerm{{2, 0, 0}, 0.5}}, true, 4.0};
  CHECK_THROWS_AS(morsefold::alpha_bound(fold_with(quad)), NoValidAlpha);
}

TEST_CASE("gradient of the correction is quadratically bounded") {
  const FoldMap f = fold_with(cubic_x1(0.3));
  const auto bound = morsefold::gradient_quadratic_bound(f, 0.1);
  CHECK(bound.measured > 0.0);
  CHECK(bound.ceiling ==
        doctest::Approx(3.0 * 0.3 + 10.0 * 0.3 * std::sqrt(3.0) * 0.5 / 0.1));
  CHECK(bound.ok());

  const auto trivial = morsefold::gradient_quadratic_bound(
      morsefold::standard_fold(2, 2, 1, 0.0), 0.1);
  CHECK(trivial.measured == 0.0);
  CHECK(trivial.ok());

  CHECK_THROWS_AS(morsefold::gradient_quadratic_bound(f, 0.0), DomainError);
}

TEST_CASE("background compatibility check") {
  const FoldMap f = morsefold::standard_fold(2, 2, 1, 0.0);

  // Canonical background: Hessian blocks are -2I and +2I, so m = 2I matches.
  Eigen::MatrixXd two = 2.0 * Eigen::MatrixXd::Identity(3, 3);
  CHECK(morsefold::compat_check({f, two}));

  // Scale mismatch.
  CHECK_FALSE(morsefold::compat_check({f, Eigen::MatrixXd::Identity(3, 3)}));

  // Coupling a negative axis (index 0) with a positive axis (index 2) mixes
  // the eigenspaces: rejected even though symmetric positive definite.
  Eigen::MatrixXd mixed = two;
  mixed(0, 2) = mixed(2, 0) = 0.3;
  CHECK_FALSE(morsefold::compat_check({f, mixed}));

  // Conjugating by a block-diagonal rotation (here within the positive
  // 2-plane) keeps compatibility.
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3);
  const double c = std::cos(0.7), s = std::sin(0.7);
  q(1, 1) = c;
  q(1, 2) = -s;
  q(2, 1) = s;
  q(2, 2) = c;
  const Eigen::MatrixXd rotated = q.transpose() * two * q;
  CHECK(morsefold::compat_check({f, rotated}));

  // Tolerance boundary on the off-block coupling.
  Eigen::MatrixXd tiny = two;
  tiny(0, 1) = tiny(1, 0) = 1e-13;
  CHECK(morsefold::compat_check({f, tiny}));
  tiny(0, 1) = tiny(1, 0) = 1e-11;
  CHECK_FALSE(morsefold::compat_check({f, tiny}));

  // Shape mismatch is a plain failure, not an error.
  CHECK_FALSE(morsefold::compat_check({f, Eigen::MatrixXd::Identity(2, 2)}));
}

TEST_CASE("verification is deterministic across worker counts") {
  const FoldMap f = fold_with(cubic_x1(0.3));
  const int saved = worker_count();
  set_worker_count(1);
  const auto res1 = morsefold::verify_deformation(f, 0.1);
  set_worker_count(8);
  const auto res8 = morsefold::verify_deformation(f, 0.1);
  set_worker_count(saved);

  CHECK(res1.ok() == res8.ok());
  CHECK(res1.dropped_seeds == res8.dropped_seeds);
  REQUIRE(res1.critical_sets.size() == res8.critical_sets.size());
  for (std::size_t i = 0; i < res1.critical_sets.size(); ++i) {
    REQUIRE(res1.critical_sets[i].points.size() ==
            res8.critical_sets[i].points.size());
    for (std::size_t j = 0; j < res1.critical_sets[i].points.size(); ++j)
      CHECK(res1.critical_sets[i].points[j] ==
            res8.critical_sets[i].points[j]);
  }
}
