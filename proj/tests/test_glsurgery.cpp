#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pscforge/charts.hpp"
#include "pscforge/curvature.hpp"
#include "pscforge/errors.hpp"
#include "pscforge/glsurgery.hpp"
#include "pscforge/oracle.hpp"
#include "pscforge/parallel.hpp"
#include "pscforge/smoothfn.hpp"

using namespace pscforge;
using curvature::DoublyWarpedMetric;
using curvature::PscReport;
using curvature::SingleWarpedMetric;
using smoothfn::Closure;
using smoothfn::SmoothProfile;
using smoothfn::make_constant_piece;
using smoothfn::make_sine_piece;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

// Round S^{p+q+1} of radius 1 as a doubly warped metric over [0, pi/2]:
// a = sin t closes a disk on the left, b = cos t closes the surgery sphere
// on the right.
DoublyWarpedMetric round_sphere_fixture(int p, int q) {
  SmoothProfile a(Closure::Disk,
                  {make_sine_piece(0.0, kHalfPi, 1.0, 1.0, 0.0)});
  SmoothProfile b(Closure::Cylinder,
                  {make_sine_piece(0.0, kHalfPi, 1.0, 1.0, kHalfPi)},
                  Closure::Disk);
  return DoublyWarpedMetric{p, q, std::move(a), std::move(b)};
}

// Transition-block fixture: two disk-closing arcs for the a-pair and two
// constants for the b-pair on a common domain [0, 1.2].
glsurgery::TransitionBlock block_fixture(double length = 8.0,
                                         double gamma = 1.0) {
  SmoothProfile a0(Closure::Disk,
                   {make_sine_piece(0.0, 1.2, 1.0, 1.0, 0.0)});
  SmoothProfile a1(Closure::Disk,
                   {make_sine_piece(0.0, 1.2, 0.9, 0.9, 0.0)});
  SmoothProfile b0(Closure::Cylinder, {make_constant_piece(0.0, 1.2, 1.0)});
  SmoothProfile b1(Closure::Cylinder, {make_constant_piece(0.0, 1.2, 0.8)});
  return glsurgery::TransitionBlock(1, 2, std::move(a0), std::move(a1),
                                    std::move(b0), std::move(b1), length,
                                    gamma);
}

}  // namespace

TEST_CASE("plateau ratio matches the frozen value and rejects bad fractions") {
  // Hand evaluation of the closed form at eta = 0.2.
  CHECK(glsurgery::plateau_ratio(0.2) ==
        doctest::Approx(0.9939999911).epsilon(1e-8));
  // Smaller blend fractions settle closer to the full arc width.
  CHECK(glsurgery::plateau_ratio(0.05) > glsurgery::plateau_ratio(0.2));
  CHECK(glsurgery::plateau_ratio(0.05) < 1.0);
  CHECK(glsurgery::plateau_ratio(0.4) < glsurgery::plateau_ratio(0.2));

  CHECK_THROWS_AS(glsurgery::plateau_ratio(0.0), DomainError);
  CHECK_THROWS_AS(glsurgery::plateau_ratio(kPi / 4.0), DomainError);
  CHECK_THROWS_AS(glsurgery::plateau_ratio(-0.1), DomainError);
}

TEST_CASE("capped profile has the canonical shape and settles to third order") {
  const double delta = 0.7;
  const SmoothProfile prof = glsurgery::torpedo_profile(delta, 0.2, 1.4);
  const double t_b = delta * kHalfPi;

  CHECK(prof.domain_length() == doctest::Approx(t_b + 1.4).epsilon(1e-15));
  CHECK(prof.closure() == Closure::Disk);
  CHECK(prof.right_closure() == Closure::Cylinder);
  REQUIRE(prof.pieces().size() == 3);
  CHECK(prof.pieces()[0].kind() == smoothfn::PieceKind::Sine);
  CHECK(prof.pieces()[1].kind() == smoothfn::PieceKind::Blend);
  CHECK(prof.pieces()[2].kind() == smoothfn::PieceKind::Constant);

  for (int order = 0; order <= 2; ++order)
    CHECK(prof.junction_mismatch(order) <= 1e-10);

  // The settle value chosen by plateau_ratio is exactly the one making the
  // blend meet the plateau to third order: rho''' vanishes at t_b. Elsewhere
  // rho''' is of size 1/delta^2, so this pins the ratio independently.
  CHECK(std::abs(prof.pieces()[1].eval(t_b, 3)) <= 1e-9);
  CHECK(std::abs(prof.pieces()[0].eval(0.1, 3)) > 0.1);

  // Concavity across the whole domain.
  for (const auto& piece : prof.pieces()) {
    for (int i = 0; i <= 200; ++i) {
      const double t = piece.t0 + (piece.t1 - piece.t0) * i / 200.0;
      CHECK(piece.eval(t, 2) <= 1e-12);
    }
  }

  const double plateau = prof.eval(prof.domain_length(), 0);
  CHECK(plateau ==
        doctest::Approx(delta * glsurgery::plateau_ratio(0.2)).epsilon(1e-12));
  CHECK(prof.eval(t_b + 0.3, 0) == plateau);

  // Exact plateau override.
  const SmoothProfile pinned =
      glsurgery::torpedo_profile_with_plateau(0.5, 0.2, 1.0);
  CHECK(pinned.eval(pinned.domain_length(), 0) == 0.5);

  CHECK_THROWS_AS(glsurgery::torpedo_profile(-1.0, 0.2, 1.0), DomainError);
  CHECK_THROWS_AS(glsurgery::torpedo_profile(1.0, 0.9, 1.0), DomainError);
  CHECK_THROWS_AS(glsurgery::torpedo_profile(1.0, 0.2, 0.0), DomainError);
}

TEST_CASE("cap and plateau curvatures match the closed forms") {
  const glsurgery::TorpedoMetric tor = glsurgery::build_torpedo(4, 0.5);
  CHECK(tor.plateau ==
        doctest::Approx(0.5 * glsurgery::plateau_ratio(0.2)).epsilon(1e-12));

  // At the cap tip the curvature is k(k-1)/delta^2 = 12 / 0.25.
  CHECK(curvature::scalar_single_warped(tor.metric(), 0.0) ==
        doctest::Approx(48.0).epsilon(1e-12));

  const PscReport rep = curvature::min_scan(tor.metric(), 512);
  CHECK(rep.positive());
  // The minimum sits on the plateau: (k-1)(k-2)/plateau^2.
  const double plateau_floor = 6.0 / (tor.plateau * tor.plateau);
  CHECK(rep.min_scalar == doctest::Approx(plateau_floor).epsilon(1e-9));
  CHECK(rep.argmin[0] >= 0.5 * kHalfPi - 1e-9);

  REQUIRE(rep.regions.size() == 3);
  CHECK(rep.regions[0].name == "piece0:sine");
  // The arc has the round sphere's constant curvature.
  CHECK(rep.regions[0].min_scalar == doctest::Approx(48.0).epsilon(1e-9));
  CHECK(rep.regions[2].min_scalar ==
        doctest::Approx(plateau_floor).epsilon(1e-12));

  // Independent finite-difference route through an explicit chart, sampled
  // inside the blend region.
  const auto chart = charts::single_warped_chart(tor.metric(), 0.55, 0.95);
  const auto x = charts::chart_center(chart);
  const double fd = oracle::scalar(chart, x, oracle::default_step(chart));
  const double closed = curvature::scalar_single_warped(tor.metric(), x[0]);
  CHECK(fd == doctest::Approx(closed).epsilon(1e-4));

  CHECK_THROWS_AS(glsurgery::build_torpedo(1, 0.5), DomainError);
  CHECK_THROWS_AS(glsurgery::build_torpedo_with_plateau(4, -0.3), DomainError);
}

TEST_CASE("pinned-plateau builder and profile round-trip") {
  const glsurgery::TorpedoMetric tor =
      glsurgery::build_torpedo_with_plateau(5, 0.3);
  CHECK(tor.profile.eval(tor.profile.domain_length(), 0) == 0.3);
  CHECK(tor.delta ==
        doctest::Approx(0.3 / glsurgery::plateau_ratio(0.2)).epsilon(1e-15));

  const glsurgery::TorpedoMetric back =
      glsurgery::torpedo_from_profile(5, tor.profile);
  CHECK(back.delta == doctest::Approx(tor.delta).epsilon(1e-12));
  CHECK(back.eta == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(back.plateau == 0.3);

  SmoothProfile flat(Closure::Cylinder, {make_constant_piece(0.0, 2.0, 1.0)});
  CHECK_THROWS_AS(glsurgery::torpedo_from_profile(3, flat), ConstructionError);
}

TEST_CASE("scaling sweep keeps min curvature times squared plateau constant") {
  const auto rows =
      glsurgery::scaling_check(4, {0.25, 0.5, 1.0, 2.0}, 0.2, 512);
  REQUIRE(rows.size() == 4);
  const double ratio = glsurgery::plateau_ratio(0.2);
  for (const auto& row : rows) {
    CHECK(row[1] == doctest::Approx(row[0] * ratio).epsilon(1e-12));
    CHECK(row[2] > 0.0);
    // (k-1)(k-2) for k = 4.
    CHECK(row[3] == doctest::Approx(6.0).epsilon(1e-9));
  }
  // Scale invariance across two octaves.
  CHECK(rows[0][2] == doctest::Approx(4.0 * rows[1][2]).epsilon(1e-9));
  CHECK(rows[1][2] == doctest::Approx(4.0 * rows[2][2]).epsilon(1e-9));
}

TEST_CASE("verification flags adversarial profiles") {
  const double delta = 0.5;
  const double eta = 0.2;
  const double t_a = delta * (kHalfPi - eta);

  SUBCASE("well-formed capped profile passes all checks") {
    const auto tor = glsurgery::build_torpedo(4, delta);
    const auto check = glsurgery::verify_torpedo(tor.metric());
    CHECK(check.sine_cap);
    CHECK(check.plateau);
    CHECK(check.junctions_smooth);
    CHECK(check.concave);
    CHECK(check.positive);
    CHECK_FALSE(check.degenerate);
    CHECK(check.ok());
    CHECK(check.cap_delta == 0.5);
    CHECK(check.plateau_value == doctest::Approx(tor.plateau));
  }

  SUBCASE("kinked junction fails the smoothness flag") {
    auto arc = make_sine_piece(0.0, t_a, delta, delta, 0.0);
    const double level = arc.eval(t_a, 0);
    auto prof = SmoothProfile::unchecked(
        Closure::Disk, {arc, make_constant_piece(t_a, t_a + 1.0, level)});
    const auto check = glsurgery::verify_torpedo({4, prof});
    CHECK(check.sine_cap);
    CHECK_FALSE(check.junctions_smooth);
    CHECK_FALSE(check.ok());
  }

  SUBCASE("overshooting settle value breaks concavity") {
    auto arc = make_sine_piece(0.0, t_a, delta, delta, 0.0);
    const std::array<double, 3> jets{arc.eval(t_a, 0), arc.eval(t_a, 1),
                                     arc.eval(t_a, 2)};
    const double t_b = delta * kHalfPi;
    SmoothProfile prof(
        Closure::Disk,
        {arc, smoothfn::hermite_quintic(t_a, t_b, jets, {1.2 * delta, 0, 0}),
         make_constant_piece(t_b, t_b + 1.0, 1.2 * delta)});
    const auto check = glsurgery::verify_torpedo({4, prof});
    CHECK(check.junctions_smooth);
    CHECK_FALSE(check.concave);
    CHECK_FALSE(check.plateau);
    CHECK_FALSE(check.ok());
  }

  SUBCASE("k = 2 has a flat cylinder part") {
    const auto tor = glsurgery::build_torpedo(2, delta);
    const auto check = glsurgery::verify_torpedo(tor.metric());
    CHECK(check.degenerate);
    CHECK_FALSE(check.positive);
    CHECK(check.scan.min_scalar == 0.0);
    CHECK(check.scan.nonpositive_count > 0);
    CHECK(check.sine_cap);
    CHECK(check.concave);
    CHECK_FALSE(check.ok());
  }

  SUBCASE("a plain cylinder is not a capped profile") {
    SmoothProfile flat(Closure::Cylinder,
                       {make_constant_piece(0.0, 2.0, 1.0)});
    const auto check = glsurgery::verify_torpedo({3, flat});
    CHECK_FALSE(check.sine_cap);
    CHECK(check.cap_delta == 0.0);
    CHECK_FALSE(check.ok());
  }
}

TEST_CASE("surgery data validation") {
  CHECK_NOTHROW(glsurgery::validate(glsurgery::SurgeryDatum{0, 2, 1.0, 0.1}));
  CHECK_NOTHROW(glsurgery::validate(glsurgery::SurgeryDatum{3, 5, 2.0, 2.0}));

  CHECK_THROWS_AS(glsurgery::validate(glsurgery::SurgeryDatum{0, 1, 1.0, 0.1}),
                  AdmissibilityError);
  CHECK_THROWS_AS(glsurgery::validate(glsurgery::SurgeryDatum{0, 2, 1.0, 1.5}),
                  AdmissibilityError);
  CHECK_THROWS_AS(glsurgery::validate(glsurgery::SurgeryDatum{-1, 2, 1.0, 0.1}),
                  DomainError);
  CHECK_THROWS_AS(glsurgery::validate(glsurgery::SurgeryDatum{0, 2, 0.0, 0.1}),
                  DomainError);
  CHECK_THROWS_AS(
      glsurgery::validate(glsurgery::SurgeryDatum{0, 2, 1.0, -0.1}),
      DomainError);
  CHECK_THROWS_AS(glsurgery::handle_product({2, 1, 1.0, 0.1}),
                  AdmissibilityError);
}

TEST_CASE("product handle curvature has the expected floor") {
  const glsurgery::SurgeryDatum d{2, 3, 1.0, 0.1};
  const auto pm = glsurgery::handle_product(d);
  CHECK(pm.f1.k == 3);
  CHECK(pm.f2.k == 3);
  CHECK(pm.f2.profile.domain_length() ==
        doctest::Approx(kPi * 0.1).epsilon(1e-15));

  const double ratio = glsurgery::plateau_ratio(0.2);
  const PscReport rep = curvature::min_scan(pm, 200);
  CHECK(rep.positive());
  // Capped factor bottoms out on its plateau, the normal sphere contributes
  // q(q-1)/delta^2 = 600 everywhere.
  CHECK(rep.min_scalar ==
        doctest::Approx(2.0 / (ratio * ratio) + 600.0).epsilon(1e-9));
  CHECK(rep.argmin_dims == 2);

  const auto pm0 = glsurgery::handle_product({0, 2, 1.0, 0.1});
  CHECK(pm0.f1.k == 1);
  CHECK(pm0.f1.profile.eval(0.5, 0) == 1.0);
  const PscReport rep0 = curvature::min_scan(pm0, 200);
  CHECK(rep0.positive());
  CHECK(rep0.min_scalar == doctest::Approx(200.0).epsilon(1e-9));
}

TEST_CASE("transition block is an exact product at both ends") {
  const auto block = block_fixture();
  CHECK(block.fiber_length() == 1.2);
  CHECK(block.length() == 8.0);

  const auto s0 = block.slice(0.0);
  CHECK(s0.first.same_representation(block.a0()));
  CHECK(s0.second.same_representation(block.b0()));
  const auto s1 = block.slice(8.0);
  CHECK(s1.first.same_representation(block.a1()));
  CHECK(s1.second.same_representation(block.b1()));
  // The schedule clamps outside [0, length].
  CHECK(block.slice(-3.0).first.same_representation(block.a0()));
  CHECK(block.slice(11.0).second.same_representation(block.b1()));

  const DoublyWarpedMetric start{1, 2, block.a0(), block.b0()};
  const DoublyWarpedMetric end{1, 2, block.a1(), block.b1()};
  for (double r : {0.2, 0.55, 0.9, 1.1}) {
    CHECK(block.scalar(0.0, r) ==
          doctest::Approx(curvature::scalar_doubly_warped(start, r))
              .epsilon(1e-12));
    CHECK(block.scalar(8.0, r) ==
          doctest::Approx(curvature::scalar_doubly_warped(end, r))
              .epsilon(1e-12));
  }

  // Schedule values and derivatives.
  CHECK(block.schedule(0.0) == 0.0);
  CHECK(block.schedule(4.0) == 0.5);
  CHECK(block.schedule(8.0) == 1.0);
  CHECK(block.schedule(-2.0) == 0.0);
  CHECK(block.schedule(9.0) == 1.0);
  for (int order : {1, 2}) {
    CHECK(block.schedule(0.0, order) == 0.0);
    CHECK(block.schedule(8.0, order) == 0.0);
  }
  CHECK(block.schedule(4.0, 1) == doctest::Approx(1.875 / 8.0).epsilon(1e-12));
  CHECK_THROWS_AS(block.schedule(2.0, 3), DomainError);
}

TEST_CASE("transition block construction guards") {
  SmoothProfile a0(Closure::Disk, {make_sine_piece(0.0, 1.2, 1.0, 1.0, 0.0)});
  SmoothProfile b0(Closure::Cylinder, {make_constant_piece(0.0, 1.2, 1.0)});
  SmoothProfile short_a(Closure::Disk,
                        {make_sine_piece(0.0, 1.0, 1.0, 1.0, 0.0)});
  SmoothProfile disk_b(Closure::Disk,
                       {make_sine_piece(0.0, 1.2, 1.2 / kPi, 1.2 / kPi, 0.0)},
                       Closure::Disk);

  CHECK_THROWS_AS(glsurgery::TransitionBlock(1, 2, a0, short_a, b0, b0, 8.0),
                  IncompatibilityError);
  CHECK_THROWS_AS(glsurgery::TransitionBlock(1, 2, a0, a0, b0, disk_b, 8.0),
                  IncompatibilityError);
  CHECK_THROWS_AS(glsurgery::TransitionBlock(0, 0, b0, b0, b0, b0, 8.0),
                  DomainError);
  CHECK_THROWS_AS(glsurgery::TransitionBlock(1, 2, a0, a0, b0, b0, 0.0),
                  DomainError);
  CHECK_THROWS_AS(glsurgery::TransitionBlock(1, 2, a0, a0, b0, b0, 8.0, 0.5),
                  DomainError);
  CHECK_THROWS_AS(glsurgery::TransitionBlock(1, 2, a0, a0, b0, b0, 8.0, 4.5),
                  DomainError);

  auto block = block_fixture();
  CHECK_THROWS_AS(block.set_bumps({{8, 0.1}}, {}), DomainError);
  CHECK_THROWS_AS(block.set_bumps({}, {{-1, 0.1}}), DomainError);
}

TEST_CASE("block scalar curvature matches the finite-difference oracle") {
  auto block = block_fixture();

  auto a_fn = [&](double t, double r) { return block.profile_a(t, r, 0, 0); };
  auto b_fn = [&](double t, double r) { return block.profile_b(t, r, 0, 0); };

  {
    const auto chart = charts::biwarped_chart(1, 2, a_fn, b_fn, 2.0, 6.0, 0.2,
                                              1.0);
    const auto x = charts::chart_center(chart);
    CHECK(oracle::scalar(chart, x, oracle::default_step(chart)) ==
          doctest::Approx(block.scalar(x[0], x[1])).epsilon(1e-4));
  }

  // Same check with lattice bumps active (the window peaks mid-schedule).
  block.set_bumps({{3, 0.05}}, {{5, -0.04}});
  {
    const auto chart = charts::biwarped_chart(1, 2, a_fn, b_fn, 2.0, 6.0, 0.2,
                                              1.0);
    const auto x = charts::chart_center(chart);
    CHECK(oracle::scalar(chart, x, oracle::default_step(chart)) ==
          doctest::Approx(block.scalar(x[0], x[1])).epsilon(1e-4));
  }

  // Slices agree with the pointwise warp values, bumps included.
  const auto [A, B] = block.slice(3.3);
  for (double r : {0.1, 0.37, 0.81, 1.13}) {
    CHECK(A.eval(r, 0) ==
          doctest::Approx(block.profile_a(3.3, r, 0, 0)).epsilon(1e-12));
    CHECK(B.eval(r, 0) ==
          doctest::Approx(block.profile_b(3.3, r, 0, 0)).epsilon(1e-12));
  }

  // Bumps vanish with the window at both ends.
  CHECK(block.slice(0.0).first.same_representation(block.a0()));
  CHECK(block.slice(8.0).first.same_representation(block.a1()));
}

TEST_CASE("block scan partitions regions and is deterministic") {
  const auto block = block_fixture();
  const PscReport rep = block.scan(96);

  REQUIRE(rep.regions.size() == 3);
  CHECK(rep.regions[0].name == "start-product");
  CHECK(rep.regions[1].name == "transition");
  CHECK(rep.regions[2].name == "end-product");
  CHECK(rep.regions[0].count == 95);
  CHECK(rep.regions[2].count == 95);
  CHECK(rep.regions[1].count == 95 * 95);
  CHECK(rep.sample_count == 97 * 95);
  CHECK(rep.positive());
  CHECK(rep.min_scalar > 1.0);

  const int saved = worker_count();
  set_worker_count(1);
  const PscReport rep1 = block.scan(96);
  set_worker_count(16);
  const PscReport rep16 = block.scan(96);
  set_worker_count(saved);
  CHECK(rep1.min_scalar == rep16.min_scalar);
  CHECK(rep1.argmin == rep16.argmin);
  CHECK(rep1.nonpositive_count == rep16.nonpositive_count);
  for (std::size_t i = 0; i < rep1.regions.size(); ++i) {
    CHECK(rep1.regions[i].min_scalar == rep16.regions[i].min_scalar);
    CHECK(rep1.regions[i].argmin == rep16.regions[i].argmin);
  }

  CHECK_THROWS_AS(block.scan(63), DomainError);
}

TEST_CASE("standardization certifies a path to the standard form") {
  const auto g0 = round_sphere_fixture(1, 2);
  const glsurgery::SurgeryDatum datum{1, 2, 1.0, 0.1};
  const auto path = glsurgery::standardize_near_sphere(g0, datum);

  CHECK(path.stages() == 8);
  CHECK(path.stage_weights.front() == 0.0);
  CHECK(path.stage_weights.back() == 1.0);
  for (int s = 1; s < path.stages(); ++s)
    CHECK(path.stage_weights[s] >= path.stage_weights[s - 1]);

  // The final slice reproduces the target pair exactly.
  CHECK(path.target_residual == 0.0);
  CHECK(path.min_scalar > 0.0);
  REQUIRE(static_cast<int>(path.stage_reports.size()) == path.stages());
  for (const auto& rep : path.stage_reports) CHECK(rep.positive());
  CHECK(path.block_report.positive());

  const auto s0 = path.stage(0);
  CHECK(s0.first.same_representation(g0.a));
  CHECK(s0.second.same_representation(g0.b));
  CHECK_THROWS_AS(path.stage(8), DomainError);

  const double ratio = glsurgery::plateau_ratio(0.2);
  CHECK(path.neck_start ==
        doctest::Approx((0.1 / ratio) * kHalfPi).epsilon(1e-12));

  // Standard form near the surgery sphere: the disk factor plateaus at
  // exactly delta and the normal factor closes as a delta-cap.
  const auto& a1 = path.block.a1();
  const auto& b1 = path.block.b1();
  const double L = g0.a.domain_length();
  CHECK(a1.domain_length() == L);
  CHECK(a1.eval(L, 0) == 0.1);
  CHECK(a1.eval(0.5 * (path.neck_start + L), 0) == 0.1);
  CHECK(b1.right_closure() == Closure::Disk);
  CHECK(b1.eval(L, 0) == doctest::Approx(0.0));
  CHECK(b1.eval(0.0, 0) == doctest::Approx(0.1 * ratio).epsilon(1e-12));
  for (double x : {0.01, 0.05}) {
    CHECK(b1.eval(L - x, 0) ==
          doctest::Approx(0.1 * std::sin(x / 0.1)).epsilon(1e-12));
  }
}

TEST_CASE("standardization rejects infeasible requests") {
  const auto g0 = round_sphere_fixture(1, 2);

  glsurgery::NeckOptions opt;
  opt.stages = 1;
  CHECK_THROWS_AS(
      glsurgery::standardize_near_sphere(g0, {1, 2, 1.0, 0.1}, opt),
      NeckInfeasible);

  // Neck too wide for the fiber domain.
  CHECK_THROWS_AS(glsurgery::standardize_near_sphere(g0, {1, 2, 1.0, 0.8}),
                  NeckInfeasible);

  // Factor exponents must match the datum.
  CHECK_THROWS_AS(glsurgery::standardize_near_sphere(g0, {2, 2, 1.0, 0.1}),
                  IncompatibilityError);
  CHECK_THROWS_AS(glsurgery::standardize_near_sphere(g0, {1, 1, 1.0, 0.1}),
                  AdmissibilityError);

  // Wrong closure pattern: b must close the surgery sphere on the right.
  DoublyWarpedMetric bad = g0;
  bad.b = SmoothProfile(Closure::Cylinder,
                        {make_constant_piece(0.0, kHalfPi, 1.0)});
  CHECK_THROWS_AS(glsurgery::standardize_near_sphere(bad, {1, 2, 1.0, 0.1}),
                  IncompatibilityError);

  // A transition forced through too quickly cannot certify: the schedule
  // derivatives scale like 1/length.
  glsurgery::NeckOptions fast;
  fast.length = 0.35;
  fast.grid = 128;
  fast.block_grid = 64;
  fast.search_bumps = false;
  CHECK_THROWS_AS(
      glsurgery::standardize_near_sphere(g0, {1, 2, 1.0, 0.1}, fast),
      NeckInfeasible);
}

TEST_CASE("assembled cobordism restores boundary and standard regions") {
  const auto g0 = round_sphere_fixture(1, 2);
  const glsurgery::SurgeryDatum datum{1, 2, 1.0, 0.1};
  const auto path = glsurgery::standardize_near_sphere(g0, datum);
  const auto cob =
      glsurgery::build_cobordism_metric(g0, path, glsurgery::AssemblyParams{});

  CHECK(cob.total_length() == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(cob.s_lower() == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(cob.s_upper() == doctest::Approx(24.0).epsilon(1e-12));

  // Below the transition the fiber is the boundary metric, bitwise.
  CHECK(cob.fiber(5.0).first.same_representation(g0.a));
  CHECK(cob.fiber(5.0).second.same_representation(g0.b));
  // Above it, the standardized pair.
  CHECK(cob.fiber(30.0).first.same_representation(path.block.a1()));
  CHECK(cob.fiber(30.0).second.same_representation(path.block.b1()));
  CHECK(cob.product_above_upper());
  CHECK_THROWS_AS(cob.fiber(-1.0), DomainError);
  CHECK_THROWS_AS(cob.fiber(41.0), DomainError);

  // Scalar curvature agrees with the fiberwise closed form in the product
  // regions.
  const DoublyWarpedMetric top{1, 2, path.block.a1(), path.block.b1()};
  for (double r : {0.3, 1.0}) {
    CHECK(cob.scalar(5.0, r) ==
          doctest::Approx(curvature::scalar_doubly_warped(g0, r))
              .epsilon(1e-12));
    CHECK(cob.scalar(30.0, r) ==
          doctest::Approx(curvature::scalar_doubly_warped(top, r))
              .epsilon(1e-12));
  }

  // Warp radii: boundary values below, the pinned plateau above.
  CHECK(cob.radii(5.0, 0.3)[0] == doctest::Approx(std::sin(0.3)).epsilon(1e-12));
  CHECK(cob.radii(30.0, path.neck_start + 0.2)[0] == 0.1);

  // Independent finite-difference route through the transition region.
  auto a_fn = [&](double s, double r) { return cob.radii(s, r)[0]; };
  auto b_fn = [&](double s, double r) { return cob.radii(s, r)[1]; };
  const auto chart =
      charts::biwarped_chart(1, 2, a_fn, b_fn, 18.0, 22.0, 0.3, 1.1);
  const auto x = charts::chart_center(chart);
  CHECK(oracle::scalar(chart, x, oracle::default_step(chart)) ==
        doctest::Approx(cob.scalar(x[0], x[1])).epsilon(1e-4));

  const PscReport rep = cob.scan(128);
  CHECK(rep.positive());
  REQUIRE(rep.regions.size() == 4);
  CHECK(rep.regions[0].name == "outside");
  CHECK(rep.regions[1].name == "transition");
  CHECK(rep.regions[2].name == "handle");
  CHECK(rep.regions[3].name == "upper");
  long total = 0;
  for (const auto& region : rep.regions) {
    CHECK(region.count > 0);
    total += region.count;
  }
  CHECK(total == rep.sample_count);
  CHECK(rep.sample_count == 129L * 127L);

  const int saved = worker_count();
  set_worker_count(1);
  const PscReport rep1 = cob.scan(128);
  set_worker_count(16);
  const PscReport rep16 = cob.scan(128);
  set_worker_count(saved);
  CHECK(rep1.min_scalar == rep16.min_scalar);
  CHECK(rep1.argmin == rep16.argmin);
}

TEST_CASE("assembly validation") {
  const auto g0 = round_sphere_fixture(1, 2);
  const auto path = glsurgery::standardize_near_sphere(g0, {1, 2, 1.0, 0.1});

  glsurgery::AssemblyParams bad;
  bad.c0 = 0.5;
  CHECK_THROWS_AS(glsurgery::build_cobordism_metric(g0, path, bad),
                  DomainError);
  bad = {};
  bad.c1 = 0.5;
  CHECK_THROWS_AS(glsurgery::build_cobordism_metric(g0, path, bad),
                  DomainError);
  bad = {};
  bad.grid = 32;
  CHECK_THROWS_AS(glsurgery::build_cobordism_metric(g0, path, bad),
                  DomainError);
  bad = {};
  bad.transition_length = 7.0;
  CHECK_THROWS_AS(glsurgery::build_cobordism_metric(g0, path, bad),
                  IncompatibilityError);

  // The path must start at the metric being extended.
  DoublyWarpedMetric other = g0;
  other.a = SmoothProfile(Closure::Disk,
                          {make_sine_piece(0.0, kHalfPi, 0.9, 0.9, 0.0)});
  CHECK_THROWS_AS(
      glsurgery::build_cobordism_metric(other, path, glsurgery::AssemblyParams{}),
      IncompatibilityError);

  const auto cob =
      glsurgery::build_cobordism_metric(g0, path, glsurgery::AssemblyParams{});
  CHECK_THROWS_AS(cob.scan(32), DomainError);
}
