#include "pscforge/glsurgery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "pscforge/errors.hpp"

namespace pscforge::glsurgery {

using smoothfn::Closure;
using smoothfn::ProfilePiece;
using smoothfn::hermite_quintic;
using smoothfn::make_constant_piece;
using smoothfn::make_sine_piece;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kQuarterPi = std::numbers::pi / 4.0;

void check_shape_params(double delta, double eta, double tail) {
  if (!(delta > 0.0))
    throw DomainError("capped profile: cap width must be positive");
  if (!(eta > 0.0 && eta < kQuarterPi))
    throw DomainError("capped profile: blend fraction must lie in (0, pi/4)");
  if (!(tail > 0.0))
    throw DomainError("capped profile: plateau length must be positive");
}

// Pieces of the capped profile. plateau_override <= 0 keeps the natural
// settle value plateau_ratio(eta) * delta.
std::vector<ProfilePiece> capped_pieces(double delta, double eta, double tail,
                                        double plateau_override) {
  const double t_a = delta * (kHalfPi - eta);
  const double t_b = delta * kHalfPi;
  const double settle =
      plateau_override > 0.0 ? plateau_override : plateau_ratio(eta) * delta;

  std::vector<ProfilePiece> pieces;
  auto arc = make_sine_piece(0.0, t_a, delta, delta, 0.0);
  const std::array<double, 3> arc_jets{arc.eval(t_a, 0), arc.eval(t_a, 1),
                                       arc.eval(t_a, 2)};
  pieces.push_back(std::move(arc));
  pieces.push_back(hermite_quintic(t_a, t_b, arc_jets, {settle, 0.0, 0.0}));
  pieces.push_back(make_constant_piece(t_b, t_b + tail, settle));
  return pieces;
}

// Capped profile with the domain end pinned exactly at total_length (the
// naive t_b + tail can drift by an ulp).
SmoothProfile capped_profile_to(double delta, double eta, double total_length,
                                double plateau_override) {
  const double tail = total_length - delta * kHalfPi;
  check_shape_params(delta, eta, tail);
  auto pieces = capped_pieces(delta, eta, tail, plateau_override);
  pieces.back().t1 = total_length;
  return SmoothProfile(Closure::Disk, std::move(pieces));
}

SmoothProfile constant_profile(double value, double length) {
  return SmoothProfile(Closure::Cylinder,
                       {make_constant_piece(0.0, length, value)});
}

SmoothProfile sphere_profile(double radius) {
  return SmoothProfile(
      Closure::Disk,
      {make_sine_piece(0.0, std::numbers::pi * radius, radius, radius, 0.0)},
      Closure::Disk);
}

}  // namespace

double plateau_ratio(double eta) {
  if (!(eta > 0.0 && eta < kQuarterPi))
    throw DomainError("plateau_ratio: blend fraction must lie in (0, pi/4)");
  // Per unit cap width: the blend's second derivative in the unit variable is
  // the cubic with psi(0) = S, psi(1) = psi'(1) = 0, integral -M, where S and
  // M carry the arc jets. Integrating twice gives the settle value below.
  const double S = -eta * eta * std::cos(eta);
  const double M = eta * std::sin(eta);
  const double c0 = S;
  const double c1 = -6.0 * S - 12.0 * M;
  const double c2 = 9.0 * S + 24.0 * M;
  const double c3 = -4.0 * S - 12.0 * M;
  return std::cos(eta) + M + c0 / 2.0 + c1 / 6.0 + c2 / 12.0 + c3 / 20.0;
}

SmoothProfile torpedo_profile(double delta, double eta, double tail) {
  check_shape_params(delta, eta, tail);
  return SmoothProfile(Closure::Disk, capped_pieces(delta, eta, tail, 0.0));
}

SmoothProfile torpedo_profile_with_plateau(double plateau, double eta,
                                           double tail) {
  if (!(plateau > 0.0))
    throw DomainError("capped profile: plateau must be positive");
  const double delta = plateau / plateau_ratio(eta);
  check_shape_params(delta, eta, tail);
  return SmoothProfile(Closure::Disk,
                       capped_pieces(delta, eta, tail, plateau));
}

TorpedoMetric build_torpedo(int k, double delta, double eta, double tail) {
  if (k < 2) throw DomainError("build_torpedo: need k >= 2");
  if (tail < 0.0) tail = 2.0 * delta;
  SmoothProfile profile = torpedo_profile(delta, eta, tail);
  const double plateau = profile.eval(profile.domain_length(), 0);
  return TorpedoMetric{k, delta, eta, plateau, std::move(profile)};
}

TorpedoMetric build_torpedo_with_plateau(int k, double plateau, double eta,
                                         double tail) {
  if (k < 2) throw DomainError("build_torpedo: need k >= 2");
  if (!(plateau > 0.0))
    throw DomainError("build_torpedo: plateau must be positive");
  if (tail < 0.0) tail = 2.0 * plateau;
  const double delta = plateau / plateau_ratio(eta);
  SmoothProfile profile = torpedo_profile_with_plateau(plateau, eta, tail);
  return TorpedoMetric{k, delta, eta, plateau, std::move(profile)};
}

TorpedoMetric torpedo_from_profile(int k, const SmoothProfile& profile) {
  if (k < 2) throw DomainError("torpedo_from_profile: need k >= 2");
  const auto& pieces = profile.pieces();
  if (pieces.empty() || pieces.front().kind() != smoothfn::PieceKind::Sine ||
      profile.closure() != Closure::Disk)
    throw ConstructionError(
        "torpedo_from_profile: profile does not start with a closing arc");
  const auto& s = pieces.front().sines.front();
  const double delta = s.delta;
  const double eta = kHalfPi - pieces.front().t1 / delta;
  const double plateau = profile.eval(profile.domain_length(), 0);
  return TorpedoMetric{k, delta, eta, plateau, profile};
}

TorpedoCheck verify_torpedo(const SingleWarpedMetric& m, int grid) {
  TorpedoCheck c;
  c.degenerate = (m.k <= 2);
  const auto& pieces = m.profile.pieces();

  if (m.profile.closure() == Closure::Disk &&
      pieces.front().kind() == smoothfn::PieceKind::Sine) {
    const auto& s = pieces.front().sines.front();
    if (s.delta > 0.0 && std::abs(s.amplitude - s.delta) <= 1e-9 * s.delta &&
        std::abs(s.phase) <= 1e-12) {
      c.sine_cap = true;
      c.cap_delta = s.delta;
    }
  }

  c.plateau_value = m.profile.eval(m.profile.domain_length(), 0);
  if (c.cap_delta > 0.0 &&
      pieces.back().kind() == smoothfn::PieceKind::Constant) {
    c.plateau = c.plateau_value > 0.9 * c.cap_delta &&
                c.plateau_value <= c.cap_delta * (1.0 + 1e-12);
  }

  double worst = 0.0;
  for (int order = 0; order <= 2; ++order)
    worst = std::max(worst, m.profile.junction_mismatch(order));
  c.junctions_smooth = worst <= 1e-10;

  // Concavity: rho'' <= 0 up to a sampling tolerance.
  double max_dd = -std::numeric_limits<double>::infinity();
  double mag = 0.0;
  for (const auto& piece : pieces) {
    constexpr int kSamples = 512;
    for (int i = 0; i <= kSamples; ++i) {
      const double t =
          piece.t0 + (piece.t1 - piece.t0) * static_cast<double>(i) / kSamples;
      const double dd = piece.eval(t, 2);
      max_dd = std::max(max_dd, dd);
      mag = std::max(mag, std::abs(dd));
    }
  }
  c.concave = max_dd <= 1e-9 * std::max(1.0, mag);

  c.scan = curvature::min_scan(m, grid);
  c.positive = c.scan.positive();
  return c;
}

std::vector<std::array<double, 4>> scaling_check(
    int k, const std::vector<double>& deltas, double eta, int grid) {
  std::vector<std::array<double, 4>> rows;
  for (double delta : deltas) {
    const TorpedoMetric tor = build_torpedo(k, delta, eta);
    const PscReport rep = curvature::min_scan(tor.metric(), grid);
    rows.push_back({delta, tor.plateau, rep.min_scalar,
                    rep.min_scalar * tor.plateau * tor.plateau});
  }
  return rows;
}

// ---------------------------------------------------------------------------

void validate(const SurgeryDatum& d) {
  if (d.p < 0) throw DomainError("surgery datum: p must be >= 0");
  if (d.q < 2)
    throw AdmissibilityError(
        "surgery datum: q >= 2 is required (the normal spheres must carry "
        "curvature)");
  if (!(d.epsilon > 0.0) || !(d.delta > 0.0))
    throw DomainError("surgery datum: scales must be positive");
  if (d.delta > d.epsilon)
    throw AdmissibilityError(
        "surgery datum: the neck width must not exceed the handle scale");
}

ProductMetric handle_product(const SurgeryDatum& d, double eta, double tail) {
  validate(d);
  if (tail < 0.0) tail = 2.0 * d.epsilon;
  SingleWarpedMetric normal{d.q, sphere_profile(d.delta)};
  if (d.p == 0) {
    // D^1 is an interval: a flat factor of length epsilon.
    return ProductMetric{{1, constant_profile(1.0, d.epsilon)},
                         std::move(normal)};
  }
  return ProductMetric{{d.p + 1, torpedo_profile(d.epsilon, eta, tail)},
                       std::move(normal)};
}

// ---------------------------------------------------------------------------

TransitionBlock::TransitionBlock(int p, int q, SmoothProfile a0,
                                 SmoothProfile a1, SmoothProfile b0,
                                 SmoothProfile b1, double length, double gamma)
    : p_(p),
      q_(q),
      a0_(std::move(a0)),
      a1_(std::move(a1)),
      b0_(std::move(b0)),
      b1_(std::move(b1)),
      length_(length),
      gamma_(gamma) {
  if (p_ < 0 || q_ < 0 || (p_ == 0 && q_ == 0))
    throw DomainError("transition block: needs at least one sphere factor");
  if (!(length_ > 0.0))
    throw DomainError("transition block: length must be positive");
  if (!(gamma_ >= 0.75 && gamma_ <= 4.0))
    throw DomainError("transition block: schedule exponent outside [0.75, 4]");
  const double L = a0_.domain_length();
  const double tol = 1e-12 * std::max(1.0, L);
  for (const SmoothProfile* f : {&a1_, &b0_, &b1_}) {
    if (std::abs(f->domain_length() - L) > tol)
      throw IncompatibilityError("transition block: fiber domains differ");
  }
  if (a0_.closure() != a1_.closure() ||
      a0_.right_closure() != a1_.right_closure() ||
      b0_.closure() != b1_.closure() ||
      b0_.right_closure() != b1_.right_closure())
    throw IncompatibilityError("transition block: closure flags differ");

  for (int n = 0; n < kLatticeNodes; ++n) {
    const double d = L / static_cast<double>(kLatticeNodes + 1);
    const double center = d * static_cast<double>(n + 1);
    lattice_.push_back(smoothfn::bump_profile(L, center - d, center + d));
  }
}

void TransitionBlock::set_bumps(std::vector<BumpTerm> bumps_a,
                                std::vector<BumpTerm> bumps_b) {
  for (const auto* bs : {&bumps_a, &bumps_b}) {
    for (const auto& b : *bs) {
      if (b.node < 0 || b.node >= kLatticeNodes)
        throw DomainError("transition block: bump node outside the lattice");
    }
  }
  bumps_a_ = std::move(bumps_a);
  bumps_b_ = std::move(bumps_b);
}

const SmoothProfile& TransitionBlock::lattice_bump(int node) const {
  return lattice_[static_cast<std::size_t>(node)];
}

double TransitionBlock::schedule(double t, int order) const {
  if (order < 0 || order > 2)
    throw DomainError("transition block: schedule order must be 0, 1, or 2");
  const double tau = t / length_;
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return order == 0 ? 1.0 : 0.0;
  const bool linear = gamma_ == 1.0;
  const double x = linear ? tau : std::pow(tau, gamma_);
  if (order == 0) return smoothfn::smoothstep01(x);
  const double xp =
      (linear ? 1.0 : gamma_ * std::pow(tau, gamma_ - 1.0)) / length_;
  if (order == 1) return smoothfn::smoothstep01_d1(x) * xp;
  const double xpp = linear ? 0.0
                            : gamma_ * (gamma_ - 1.0) *
                                  std::pow(tau, gamma_ - 2.0) /
                                  (length_ * length_);
  return smoothfn::smoothstep01_d2(x) * xp * xp +
         smoothfn::smoothstep01_d1(x) * xpp;
}

double TransitionBlock::warp(bool use_a, double t, double r, int dt,
                             int dr) const {
  const SmoothProfile& f0 = use_a ? a0_ : b0_;
  const SmoothProfile& f1 = use_a ? a1_ : b1_;
  const auto& bumps = use_a ? bumps_a_ : bumps_b_;

  double v;
  if (dt == 0) {
    const double u = schedule(t, 0);
    v = (1.0 - u) * f0.eval(r, dr) + u * f1.eval(r, dr);
  } else {
    v = schedule(t, dt) * (f1.eval(r, dr) - f0.eval(r, dr));
  }

  if (!bumps.empty()) {
    // Window 4u(1-u) and its t-derivatives.
    const double u = schedule(t, 0);
    double w = 0.0;
    if (dt == 0) {
      w = 4.0 * u * (1.0 - u);
    } else if (dt == 1) {
      w = 4.0 * schedule(t, 1) * (1.0 - 2.0 * u);
    } else {
      const double u1 = schedule(t, 1);
      w = 4.0 * schedule(t, 2) * (1.0 - 2.0 * u) - 8.0 * u1 * u1;
    }
    if (w != 0.0) {
      for (const auto& b : bumps)
        v += b.amplitude * w * lattice_bump(b.node).eval(r, dr);
    }
  }
  return v;
}

double TransitionBlock::profile_a(double t, double r, int dt, int dr) const {
  if (dt < 0 || dr < 0 || dt > 2 || dr > 2 || dt + dr > 2)
    throw DomainError("transition block: unsupported derivative order");
  return warp(true, t, r, dt, dr);
}

double TransitionBlock::profile_b(double t, double r, int dt, int dr) const {
  if (dt < 0 || dr < 0 || dt > 2 || dr > 2 || dt + dr > 2)
    throw DomainError("transition block: unsupported derivative order");
  return warp(false, t, r, dt, dr);
}

double TransitionBlock::scalar(double t, double r) const {
  double R = 0.0;
  double A = 1.0, At = 0.0, Ar = 0.0;
  double B = 1.0, Bt = 0.0, Br = 0.0;
  if (p_ > 0) {
    A = warp(true, t, r, 0, 0);
    if (!(A > 0.0))
      throw DegenerateMetricError("transition block: warp A <= 0");
    At = warp(true, t, r, 1, 0);
    Ar = warp(true, t, r, 0, 1);
    const double lap = warp(true, t, r, 2, 0) + warp(true, t, r, 0, 2);
    const double p = static_cast<double>(p_);
    R += -2.0 * p * lap / A +
         p * (p - 1.0) * (1.0 - At * At - Ar * Ar) / (A * A);
  }
  if (q_ > 0) {
    B = warp(false, t, r, 0, 0);
    if (!(B > 0.0))
      throw DegenerateMetricError("transition block: warp B <= 0");
    Bt = warp(false, t, r, 1, 0);
    Br = warp(false, t, r, 0, 1);
    const double lap = warp(false, t, r, 2, 0) + warp(false, t, r, 0, 2);
    const double q = static_cast<double>(q_);
    R += -2.0 * q * lap / B +
         q * (q - 1.0) * (1.0 - Bt * Bt - Br * Br) / (B * B);
  }
  if (p_ > 0 && q_ > 0) {
    R += -2.0 * static_cast<double>(p_) * static_cast<double>(q_) *
         (At * Bt + Ar * Br) / (A * B);
  }
  return R;
}

std::pair<SmoothProfile, SmoothProfile> TransitionBlock::slice(double t) const {
  const double u = schedule(t, 0);
  const double w = 4.0 * u * (1.0 - u);

  auto mixed = [&](const SmoothProfile& f0, const SmoothProfile& f1,
                   const std::vector<BumpTerm>& bumps) {
    if (bumps.empty() || w == 0.0)
      return smoothfn::blend_profiles(f1, f0, u);
    std::vector<const SmoothProfile*> parts{&f0, &f1};
    std::vector<double> coeffs{1.0 - u, u};
    for (const auto& b : bumps) {
      parts.push_back(&lattice_bump(b.node));
      coeffs.push_back(b.amplitude * w);
    }
    return smoothfn::linear_combination(parts, coeffs);
  };

  return {mixed(a0_, a1_, bumps_a_), mixed(b0_, b1_, bumps_b_)};
}

PscReport TransitionBlock::scan(int grid) const {
  if (grid < 64) throw DomainError("transition block scan: grid must be >= 64");
  const double L = fiber_length();
  std::vector<double> ts, rs;
  for (int i = 0; i <= grid; ++i)
    ts.push_back(length_ * static_cast<double>(i) / static_cast<double>(grid));
  for (int j = 1; j < grid; ++j)
    rs.push_back(L * static_cast<double>(j) / static_cast<double>(grid));

  const std::vector<std::string> names{"start-product", "transition",
                                       "end-product"};
  const std::size_t last = ts.size() - 1;
  return curvature::grid_scan_2d(
      ts, rs, names,
      [&](std::size_t i, std::size_t j) { return scalar(ts[i], rs[j]); },
      [&](std::size_t i, std::size_t) -> int {
        if (i == 0) return 0;
        if (i == last) return 2;
        return 1;
      },
      curvature::GridSpec{grid, 2});
}

// ---------------------------------------------------------------------------

std::pair<SmoothProfile, SmoothProfile> IsotopyPath::stage(int s) const {
  if (s < 0 || s >= stages())
    throw DomainError("isotopy path: stage index out of range");
  return block.slice(stage_times[static_cast<std::size_t>(s)]);
}

namespace {

struct Certification {
  bool ok = false;
  double score = -std::numeric_limits<double>::infinity();
  std::vector<double> times;
  std::vector<double> weights;
  std::vector<PscReport> stage_reports;
  PscReport block_report;
  double stage_min = 0.0;
};

Certification certify_block(const TransitionBlock& block,
                            const NeckOptions& opt) {
  Certification c;
  const int S = opt.stages;
  double worst_stage = std::numeric_limits<double>::infinity();
  for (int s = 0; s < S; ++s) {
    const double t =
        block.length() * static_cast<double>(s) / static_cast<double>(S - 1);
    c.times.push_back(t);
    c.weights.push_back(block.schedule(t, 0));
    try {
      const auto [A, B] = block.slice(t);
      c.stage_reports.push_back(curvature::min_scan(
          DoublyWarpedMetric{block.p(), block.q(), A, B}, opt.grid));
    } catch (const Error&) {
      return c;  // candidate produced an invalid fiber; reject
    }
    worst_stage = std::min(worst_stage, c.stage_reports.back().min_scalar);
  }
  try {
    c.block_report = block.scan(opt.block_grid);
  } catch (const Error&) {
    return c;
  }
  c.stage_min = worst_stage;
  c.score = std::min(worst_stage, c.block_report.min_scalar);
  c.ok = c.score > 0.0;
  return c;
}

IsotopyPath assemble_path(TransitionBlock block, Certification cert,
                          double neck_start) {
  // Residual of the final slice against the stored targets.
  const auto [A, B] = block.slice(block.length());
  double residual = 0.0;
  const double L = block.fiber_length();
  for (int i = 0; i <= 512; ++i) {
    const double r = L * static_cast<double>(i) / 512.0;
    residual = std::max(residual,
                        std::abs(A.eval(r, 0) - block.a1().eval(r, 0)));
    residual = std::max(residual,
                        std::abs(B.eval(r, 0) - block.b1().eval(r, 0)));
  }
  return IsotopyPath{std::move(block),
                     std::move(cert.times),
                     std::move(cert.weights),
                     neck_start,
                     residual,
                     cert.stage_min,
                     std::move(cert.stage_reports),
                     std::move(cert.block_report)};
}

void add_bump(std::vector<BumpTerm>& bumps, int node, double amp) {
  for (auto& b : bumps) {
    if (b.node == node) {
      b.amplitude += amp;
      return;
    }
  }
  bumps.push_back({node, amp});
}

}  // namespace

IsotopyPath standardize_near_sphere(const DoublyWarpedMetric& g0,
                                    const SurgeryDatum& datum,
                                    const NeckOptions& opt) {
  validate(datum);
  if (g0.p != datum.p || g0.q != datum.q)
    throw IncompatibilityError(
        "standardize: the warped factors do not match the surgery datum");
  if (opt.stages < 2)
    throw NeckInfeasible("standardize: at least two stages are required");
  if (g0.a.closure() != Closure::Disk ||
      g0.a.right_closure() != Closure::Cylinder ||
      g0.b.closure() != Closure::Cylinder ||
      g0.b.right_closure() != Closure::Disk)
    throw IncompatibilityError(
        "standardize: expected a to close a disk on the left and b to close "
        "the surgery sphere on the right");

  const double L = g0.a.domain_length();
  const double ratio = plateau_ratio(opt.eta);
  const double delta_a = datum.delta / ratio;
  if (delta_a * kHalfPi > 0.75 * L || datum.delta * kHalfPi > 0.75 * L)
    throw NeckInfeasible(
        "standardize: the requested neck width does not fit the fiber domain");

  const SmoothProfile a1 =
      capped_profile_to(delta_a, opt.eta, L, datum.delta);
  const SmoothProfile b1 =
      smoothfn::mirror(capped_profile_to(datum.delta, opt.eta, L, 0.0));
  const double neck_start = delta_a * kHalfPi;

  // Schedule ladder first: pure reparametrizations of the linear mix.
  for (double gamma : {1.0, 0.75, 1.5, 2.0}) {
    TransitionBlock block(datum.p, datum.q, g0.a, a1, g0.b, b1, opt.length,
                          gamma);
    Certification cert = certify_block(block, opt);
    if (cert.ok) return assemble_path(std::move(block), std::move(cert),
                                      neck_start);
  }
  if (!opt.search_bumps)
    throw NeckInfeasible(
        "standardize: no schedule exponent certified and the bump search is "
        "disabled");

  // Deterministic coordinate descent over lattice bump amplitudes.
  TransitionBlock best(datum.p, datum.q, g0.a, a1, g0.b, b1, opt.length, 1.0);
  Certification best_cert = certify_block(best, opt);
  const double step = 0.05 * datum.delta;
  for (int pass = 0; pass < 2; ++pass) {
    for (int side = 0; side < 2; ++side) {
      for (int node = 0; node < TransitionBlock::kLatticeNodes; ++node) {
        for (double amp : {step, -step, 2.0 * step, -2.0 * step}) {
          std::vector<BumpTerm> ba = best.bumps_a();
          std::vector<BumpTerm> bb = best.bumps_b();
          add_bump(side == 0 ? ba : bb, node, amp);
          TransitionBlock cand(datum.p, datum.q, g0.a, a1, g0.b, b1,
                               opt.length, 1.0);
          cand.set_bumps(std::move(ba), std::move(bb));
          Certification cert = certify_block(cand, opt);
          if (cert.score > best_cert.score) {
            best = std::move(cand);
            best_cert = std::move(cert);
            if (best_cert.ok)
              return assemble_path(std::move(best), std::move(best_cert),
                                   neck_start);
          }
        }
      }
    }
  }
  throw NeckInfeasible(
      "standardize: the schedule and bump search exhausted its candidates "
      "without certifying positivity");
}

// ---------------------------------------------------------------------------

void validate(const AssemblyParams& p) {
  if (!(0.0 < p.c0 && p.c0 < 0.5 && 0.5 < p.c1 && p.c1 < 1.0))
    throw DomainError(
        "assembly: require 0 < c0 < 1/2 < c1 < 1 for the region fractions");
  if (!(p.transition_length > 0.0))
    throw DomainError("assembly: transition length must be positive");
  if (p.grid < 64) throw DomainError("assembly: grid must be >= 64");
}

CobordismMetric::CobordismMetric(DoublyWarpedMetric g0, IsotopyPath path,
                                 AssemblyParams params)
    : g0_(std::move(g0)), path_(std::move(path)), params_(params) {
  validate(params_);
  if (!g0_.a.same_representation(path_.block.a0()) ||
      !g0_.b.same_representation(path_.block.b0()))
    throw IncompatibilityError(
        "assembly: the path does not start at the boundary metric");
  if (std::abs(path_.block.length() - params_.transition_length) >
      1e-12 * std::max(1.0, params_.transition_length))
    throw IncompatibilityError(
        "assembly: the path block length does not match transition_length");
  total_ = params_.transition_length / (params_.c1 - params_.c0);
  lower_ = params_.c0 * total_;
  upper_ = params_.c1 * total_;
}

double CobordismMetric::block_time(double s) const {
  return std::clamp(s - lower_, 0.0, path_.block.length());
}

std::pair<SmoothProfile, SmoothProfile> CobordismMetric::fiber(double s) const {
  if (s < -1e-12 * total_ || s > total_ * (1.0 + 1e-12))
    throw DomainError("assembly: position outside the cobordism");
  if (s <= lower_) return {g0_.a, g0_.b};
  if (s >= upper_) return {path_.block.a1(), path_.block.b1()};
  return path_.block.slice(s - lower_);
}

std::array<double, 2> CobordismMetric::radii(double s, double r) const {
  const double t = block_time(s);
  return {path_.block.profile_a(t, r, 0, 0),
          path_.block.profile_b(t, r, 0, 0)};
}

double CobordismMetric::scalar(double s, double r) const {
  return path_.block.scalar(block_time(s), r);
}

PscReport CobordismMetric::scan(int grid) const {
  if (grid <= 0) grid = params_.grid;
  if (grid < 64) throw DomainError("assembly scan: grid must be >= 64");
  const double L = path_.block.fiber_length();
  std::vector<double> ss, rs;
  for (int i = 0; i <= grid; ++i)
    ss.push_back(total_ * static_cast<double>(i) / static_cast<double>(grid));
  for (int j = 1; j < grid; ++j)
    rs.push_back(L * static_cast<double>(j) / static_cast<double>(grid));

  const std::vector<std::string> names{"outside", "transition", "handle",
                                       "upper"};
  const double neck = path_.neck_start;
  return curvature::grid_scan_2d(
      ss, rs, names,
      [&](std::size_t i, std::size_t j) { return scalar(ss[i], rs[j]); },
      [&](std::size_t i, std::size_t j) -> int {
        if (ss[i] < lower_) return 0;
        if (ss[i] <= upper_) return 1;
        return rs[j] >= neck ? 2 : 3;
      },
      curvature::GridSpec{grid, 2});
}

bool CobordismMetric::product_above_upper() const {
  if (path_.block.schedule(path_.block.length(), 0) != 1.0) return false;
  for (double frac : {0.25, 0.6, 1.0}) {
    const double s = upper_ + frac * (total_ - upper_);
    const auto [A, B] = fiber(s);
    if (!A.same_representation(path_.block.a1()) ||
        !B.same_representation(path_.block.b1()))
      return false;
  }
  return true;
}

CobordismMetric build_cobordism_metric(const DoublyWarpedMetric& g0,
                                       const IsotopyPath& path,
                                       const AssemblyParams& params) {
  return CobordismMetric(g0, path, params);
}

}  // namespace pscforge::glsurgery
