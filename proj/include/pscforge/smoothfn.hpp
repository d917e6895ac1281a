#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace pscforge::smoothfn {

// One additive term A * sin(t / delta + phase). delta doubles as the
// amplitude of the canonical closing arc delta * sin(t / delta), which is
// why it is stored instead of a raw frequency.
struct SineTerm {
  double amplitude = 0.0;
  double delta = 1.0;
  double phase = 0.0;
};

// Polynomial in (t - anchor). Anchors are carried per term so that
// restriction and linear combination never reshift coefficients; term
// arithmetic stays exact.
struct PolyTerm {
  double anchor = 0.0;
  std::vector<double> coeffs;  // coeffs[i] multiplies (t - anchor)^i
};

enum class PieceKind { Sine, Constant, Blend };

// Analytic piece of a profile: sum of sine terms plus anchored polynomials
// on [t0, t1].
struct ProfilePiece {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<SineTerm> sines;
  std::vector<PolyTerm> polys;

  // order in {0,1,2,3}: value and first three derivatives.
  double eval(double t, int order) const;
  PieceKind kind() const;
};

ProfilePiece make_sine_piece(double t0, double t1, double amplitude,
                             double delta, double phase = 0.0);
ProfilePiece make_constant_piece(double t0, double t1, double value);

// C^2 quintic Hermite segment on [t0, t1] matching the given
// (value, first, second) jets at both ends.
ProfilePiece hermite_quintic(double t0, double t1,
                             const std::array<double, 3>& left,
                             const std::array<double, 3>& right);

// End behaviour of a radial profile. Disk means the profile closes a disk
// smoothly there: value 0 with unit slope into the domain (rho'(0) = +1 on
// the left end, rho'(L) = -1 on the right). Cylinder means a positive value.
enum class Closure { Disk, Cylinder };

// Piecewise-analytic C^2 radial function on [0, L], positive in the
// interior, with declared behaviour at each end.
class SmoothProfile {
 public:
  SmoothProfile(Closure left, std::vector<ProfilePiece> pieces,
                Closure right = Closure::Cylinder);

  // Skips junction/positivity validation; for adversarial fixtures.
  static SmoothProfile unchecked(Closure left, std::vector<ProfilePiece> pieces,
                                 Closure right = Closure::Cylinder);

  double domain_length() const { return length_; }
  Closure closure() const { return left_; }  // left end
  Closure right_closure() const { return right_; }
  const std::vector<ProfilePiece>& pieces() const { return pieces_; }

  double eval(double t, int order = 0) const;
  double operator()(double t) const { return eval(t, 0); }

  // One-sided evaluation against a specific piece (junction limits).
  double eval_piece(std::size_t index, double t, int order) const;

  // Index of the piece covering t (junctions resolve to the left piece).
  std::size_t piece_index(double t) const;

  // Largest junction disagreement of the given derivative order, relative
  // to max(1, local magnitude).
  double junction_mismatch(int order) const;

  // Minimum sampled value on [t_from, L], piece boundaries included.
  double min_value(double t_from, std::size_t samples_per_piece = 1024) const;

  // Exact structural equality (same pieces, terms, coefficients).
  bool same_representation(const SmoothProfile& other) const;

 private:
  SmoothProfile() = default;
  void validate() const;

  Closure left_ = Closure::Cylinder;
  Closure right_ = Closure::Cylinder;
  double length_ = 0.0;
  std::vector<ProfilePiece> pieces_;
};

// lambda * p1 + (1 - lambda) * p2 on the union partition. No compatibility
// contract beyond equal domains and closures; used by path construction.
// lambda 0 or 1 returns the corresponding input unchanged.
SmoothProfile blend_profiles(const SmoothProfile& p1, const SmoothProfile& p2,
                             double lambda);

// General linear combination sum_i coeffs[i] * profiles[i] on the union
// partition. Domains must agree; the result carries the first profile's
// closure flags and passes full validation (so a combination that loses
// positivity or breaks a closure raises ConstructionError).
SmoothProfile linear_combination(const std::vector<const SmoothProfile*>& profiles,
                                 const std::vector<double>& coeffs);

// C^2 bump supported on [t_lo, t_hi] inside [0, length]: zero value, slope
// and curvature at the support ends, peak value 1 at the support midpoint.
// Returned unchecked (a bump alone is not positive), meant as a summand for
// linear_combination.
SmoothProfile bump_profile(double length, double t_lo, double t_hi);

// Same combination, but enforces the fixed-delta contract: both profiles
// must share one sine amplitude delta, domain length, and closure.
// Cross-delta requests raise IncompatibilityError.
SmoothProfile convex_combine(const SmoothProfile& p1, const SmoothProfile& p2,
                             double lambda);

// Reverses the parameter: result(t) = p(L - t). Exact on the term level.
SmoothProfile mirror(const SmoothProfile& p);

// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 on [0,1], clamped outside.
double smoothstep01(double u);
double smoothstep01_d1(double u);
double smoothstep01_d2(double u);

// Radial bump cutoff: 1 on [0, alpha], 0 on [2 alpha, inf), reversed
// quintic smoothstep in between. sup |phi'| = 1.875 / alpha.
struct Cutoff {
  double alpha = 1.0;
  double operator()(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
};

Cutoff make_cutoff(double alpha);  // alpha <= 0 raises DomainError

}  // namespace pscforge::smoothfn
