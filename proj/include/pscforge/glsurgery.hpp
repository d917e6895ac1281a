#pragma once

#include <array>
#include <utility>
#include <vector>

#include "pscforge/curvature.hpp"
#include "pscforge/smoothfn.hpp"

namespace pscforge::glsurgery {

using curvature::DoublyWarpedMetric;
using curvature::ProductMetric;
using curvature::PscReport;
using curvature::SingleWarpedMetric;
using smoothfn::SmoothProfile;

// ---------------------------------------------------------------------------
// Capped cylinder ("torpedo") profiles
// ---------------------------------------------------------------------------

// Ratio of the settled plateau radius to the cap arc width, as a function of
// the blend fraction eta. Slightly below 1 (about 0.994 at eta = 0.2).
double plateau_ratio(double eta);

// Canonical capped-cylinder profile: sine arc of width delta on
// [0, delta*(pi/2 - eta)], a concave quintic blend up to delta*pi/2, then a
// constant plateau of the given tail length. Requires eta in (0, pi/4) and
// tail > 0; the result is C^2, concave, and closes a disk on the left.
SmoothProfile torpedo_profile(double delta, double eta, double tail);

// Same shape, but with the plateau pinned to an exact target value; the cap
// width is derived as plateau / plateau_ratio(eta).
SmoothProfile torpedo_profile_with_plateau(double plateau, double eta,
                                           double tail);

struct TorpedoMetric {
  int k = 3;           // manifold dimension
  double delta = 1.0;  // cap arc width
  double eta = 0.2;    // blend fraction
  double plateau = 0.0;
  SmoothProfile profile;

  SingleWarpedMetric metric() const { return {k, profile}; }
};

// tail < 0 selects the default plateau length 2 * delta.
TorpedoMetric build_torpedo(int k, double delta, double eta = 0.2,
                            double tail = -1.0);
// Plateau pinned exactly; tail < 0 selects 2 * plateau.
TorpedoMetric build_torpedo_with_plateau(int k, double plateau,
                                         double eta = 0.2, double tail = -1.0);

// Reads the shape parameters back out of a profile previously produced by
// the builders (cap width from the arc, plateau from the right end).
TorpedoMetric torpedo_from_profile(int k, const SmoothProfile& profile);

struct TorpedoCheck {
  bool sine_cap = false;         // first piece is the canonical closing arc
  bool plateau = false;          // settles at a constant in (0.9 d, d]
  bool junctions_smooth = false; // C^2 junctions within 1e-10
  bool concave = false;          // rho'' <= 0 up to sampling tolerance
  bool positive = false;         // grid scan of scalar curvature stays > 0
  bool degenerate = false;       // k <= 2: the cylinder part carries no curvature
  double cap_delta = 0.0;
  double plateau_value = 0.0;
  PscReport scan;

  bool ok() const {
    return sine_cap && plateau && junctions_smooth && concave && positive &&
           !degenerate;
  }
};

// Structural and curvature checks for a profile claimed to be a capped
// cylinder of the canonical shape.
TorpedoCheck verify_torpedo(const SingleWarpedMetric& m, int grid = 512);

// Scale sweep: rows {delta, plateau, min R, min R * plateau^2}. The last
// column is scale-invariant.
std::vector<std::array<double, 4>> scaling_check(
    int k, const std::vector<double>& deltas, double eta = 0.2, int grid = 512);

// ---------------------------------------------------------------------------
// Surgery data and the product handle
// ---------------------------------------------------------------------------

// Surgery on an embedded S^p with trivialized normal bundle D^{q+1} inside an
// n-manifold, n = p + q + 1. epsilon is the handle scale, delta the neck
// width. q >= 2 keeps the normal spheres curved enough to dominate.
struct SurgeryDatum {
  int p = 0;
  int q = 2;
  double epsilon = 1.0;
  double delta = 0.1;
};

// Raises AdmissibilityError (q <= 1, delta > epsilon) or DomainError
// (non-positive scales, negative p).
void validate(const SurgeryDatum& d);

// Product handle D^{p+1} x S^q: capped cylinder of scale epsilon times the
// round delta-sphere. Scalar curvature is bounded below by q(q-1)/delta^2.
// For p = 0 the first factor is a flat interval.
ProductMetric handle_product(const SurgeryDatum& d, double eta = 0.2,
                             double tail = -1.0);

// ---------------------------------------------------------------------------
// Transition block: a time-dependent family of warped fibers
// ---------------------------------------------------------------------------

struct BumpTerm {
  int node = 0;  // index into the fixed radial lattice
  double amplitude = 0.0;
};

// Metric over a flat 2D (t, r) base:
//   G = dt^2 + dr^2 + A(t,r)^2 ds_p^2 + B(t,r)^2 ds_q^2
// with A(t, .) = (1-u) a0 + u a1 + bump terms, u = S5((t/length)^gamma),
// and B likewise. u' = u'' = 0 at both ends, so the block is an exact
// product there. Scalar curvature comes in closed form
//   R = -2p dA/A - 2q dB/B + p(p-1)(1-|grad A|^2)/A^2
//       + q(q-1)(1-|grad B|^2)/B^2 - 2pq <grad A, grad B>/(AB)
// (d = flat Laplacian in (t, r)); time slices are exact profiles, so the
// same object backs both the 2D certification and the per-stage scans.
class TransitionBlock {
 public:
  static constexpr int kLatticeNodes = 8;

  TransitionBlock(int p, int q, SmoothProfile a0, SmoothProfile a1,
                  SmoothProfile b0, SmoothProfile b1, double length,
                  double gamma = 1.0);

  int p() const { return p_; }
  int q() const { return q_; }
  double length() const { return length_; }
  double fiber_length() const { return a0_.domain_length(); }
  double gamma() const { return gamma_; }
  const SmoothProfile& a0() const { return a0_; }
  const SmoothProfile& a1() const { return a1_; }
  const SmoothProfile& b0() const { return b0_; }
  const SmoothProfile& b1() const { return b1_; }
  const std::vector<BumpTerm>& bumps_a() const { return bumps_a_; }
  const std::vector<BumpTerm>& bumps_b() const { return bumps_b_; }

  // Bump amplitudes ride on the window 4 u (1-u), so they vanish to second
  // order at both ends and at u = 0, 1.
  void set_bumps(std::vector<BumpTerm> bumps_a, std::vector<BumpTerm> bumps_b);

  // Schedule u(t) and its first two derivatives; clamped outside [0, length].
  double schedule(double t, int order = 0) const;

  // Warp values and partials; dt + dr <= 2.
  double profile_a(double t, double r, int dt, int dr) const;
  double profile_b(double t, double r, int dt, int dr) const;

  double scalar(double t, double r) const;

  // Exact fiber profiles at time t. Returns the stored end profiles bitwise
  // when the schedule sits exactly at 0 or 1 and no bump is active.
  std::pair<SmoothProfile, SmoothProfile> slice(double t) const;

  // Deterministic 2D scan over [0, length] x (0, fiber length), interior in r.
  PscReport scan(int grid) const;

 private:
  double warp(bool use_a, double t, double r, int dt, int dr) const;
  const SmoothProfile& lattice_bump(int node) const;

  int p_ = 0;
  int q_ = 0;
  SmoothProfile a0_, a1_, b0_, b1_;
  double length_ = 1.0;
  double gamma_ = 1.0;
  std::vector<BumpTerm> bumps_a_, bumps_b_;
  std::vector<SmoothProfile> lattice_;  // shared C^2 hats over the fiber
};

// ---------------------------------------------------------------------------
// Neck standardization
// ---------------------------------------------------------------------------

struct NeckOptions {
  int stages = 8;      // >= 2 fiber snapshots along the path
  int grid = 256;      // radial stations per stage scan
  int block_grid = 96; // 2D certification grid
  double eta = 0.2;
  double length = 8.0; // block time length
  bool search_bumps = true;
};

// A certified deformation from a warped metric to the standard form near the
// surgery sphere, realized as a transition block plus stage snapshots.
struct IsotopyPath {
  TransitionBlock block;
  std::vector<double> stage_times;
  std::vector<double> stage_weights;  // schedule values at those times
  double neck_start = 0.0;       // radial start of the standardized plateau
  double target_residual = 0.0;  // sup |final slice - target| over a grid
  double min_scalar = 0.0;       // worst stage minimum
  std::vector<PscReport> stage_reports;
  PscReport block_report;

  int stages() const { return static_cast<int>(stage_times.size()); }
  std::pair<SmoothProfile, SmoothProfile> stage(int s) const;
};

// Deforms g0 = dt^2 + a^2 ds_p^2 + b^2 ds_q^2 (a closing a disk on the left,
// b closing the surgery sphere on the right) to the standard pair
//   a* = capped cylinder with plateau exactly datum.delta,
//   b* = mirrored capped cylinder of width datum.delta,
// through fiberwise-positive stages. Raises NeckInfeasible when the stage
// budget is under 2, the requested widths do not fit the domain, or the
// schedule/bump search exhausts its candidates.
IsotopyPath standardize_near_sphere(const DoublyWarpedMetric& g0,
                                    const SurgeryDatum& datum,
                                    const NeckOptions& opt = {});

// ---------------------------------------------------------------------------
// Cobordism assembly
// ---------------------------------------------------------------------------

struct AssemblyParams {
  double c0 = 0.4;  // fraction of the cobordism below the transition
  double c1 = 0.6;  // fraction where the standardized region starts
  double transition_length = 8.0;
  int grid = 192;
};

// Requires 0 < c0 < 1/2 < c1 < 1 and a positive transition length.
void validate(const AssemblyParams& p);

// ds^2 + g_s over s in [0, total_length]: the boundary metric g0 below
// s_lower (bitwise), the isotopy's transition block in the middle, and the
// standardized product above s_upper.
class CobordismMetric {
 public:
  CobordismMetric(DoublyWarpedMetric g0, IsotopyPath path,
                  AssemblyParams params);

  double total_length() const { return total_; }
  double s_lower() const { return lower_; }
  double s_upper() const { return upper_; }
  const DoublyWarpedMetric& boundary() const { return g0_; }
  const IsotopyPath& path() const { return path_; }
  const AssemblyParams& params() const { return params_; }

  // Fiber profiles at cobordism position s; bitwise g0 below s_lower and
  // bitwise the standardized pair above s_upper.
  std::pair<SmoothProfile, SmoothProfile> fiber(double s) const;

  // Invariant warp radii (A, B) at (s, r); the metric components depend on
  // the sphere coordinates only through these.
  std::array<double, 2> radii(double s, double r) const;

  double scalar(double s, double r) const;

  // 2D scan with regions outside / transition / handle / upper.
  // grid <= 0 selects params.grid.
  PscReport scan(int grid = 0) const;

  bool product_above_upper() const;

 private:
  double block_time(double s) const;

  DoublyWarpedMetric g0_;
  IsotopyPath path_;
  AssemblyParams params_;
  double total_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

CobordismMetric build_cobordism_metric(const DoublyWarpedMetric& g0,
                                       const IsotopyPath& path,
                                       const AssemblyParams& params);

}  // namespace pscforge::glsurgery
