#include "pscforge/smoothfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "pscforge/errors.hpp"

namespace pscforge::smoothfn {

namespace {

constexpr double kJunctionTol = 1e-10;
constexpr double kNodeMergeTol = 1e-12;
constexpr double kClosureTol = 1e-12;

double falling_factorial(int i, int order) {
  double f = 1.0;
  for (int j = 0; j < order; ++j) f *= static_cast<double>(i - j);
  return f;
}

}  // namespace

double ProfilePiece::eval(double t, int order) const {
  double v = 0.0;
  for (const auto& s : sines) {
    const double arg = t / s.delta + s.phase;
    switch (order) {
      case 0: v += s.amplitude * std::sin(arg); break;
      case 1: v += s.amplitude / s.delta * std::cos(arg); break;
      case 2: v -= s.amplitude / (s.delta * s.delta) * std::sin(arg); break;
      case 3: v -= s.amplitude / (s.delta * s.delta * s.delta) * std::cos(arg); break;
      default: throw DomainError("profile eval: unsupported derivative order");
    }
  }
  for (const auto& p : polys) {
    const double s0 = t - p.anchor;
    double acc = 0.0;
    for (int i = static_cast<int>(p.coeffs.size()) - 1; i >= order; --i) {
      acc = acc * s0 +
            p.coeffs[static_cast<std::size_t>(i)] * falling_factorial(i, order);
    }
    v += acc;
  }
  return v;
}

PieceKind ProfilePiece::kind() const {
  if (polys.empty() && sines.size() == 1) return PieceKind::Sine;
  if (sines.empty()) {
    bool constant_only = true;
    for (const auto& p : polys) {
      for (std::size_t i = 1; i < p.coeffs.size(); ++i) {
        if (p.coeffs[i] != 0.0) constant_only = false;
      }
    }
    if (constant_only) return PieceKind::Constant;
  }
  return PieceKind::Blend;
}

ProfilePiece make_sine_piece(double t0, double t1, double amplitude,
                             double delta, double phase) {
  ProfilePiece p;
  p.t0 = t0;
  p.t1 = t1;
  p.sines.push_back({amplitude, delta, phase});
  return p;
}

ProfilePiece make_constant_piece(double t0, double t1, double value) {
  ProfilePiece p;
  p.t0 = t0;
  p.t1 = t1;
  p.polys.push_back({t0, {value}});
  return p;
}

ProfilePiece hermite_quintic(double t0, double t1,
                             const std::array<double, 3>& left,
                             const std::array<double, 3>& right) {
  if (!(t1 > t0)) throw DomainError("hermite_quintic: empty interval");
  const double w = t1 - t0;
  // Solve q(u) on [0,1] with both end jets prescribed (u-scaled), then map
  // the coefficients back to s = t - t0.
  const double v0 = left[0], d0 = left[1] * w, s0 = left[2] * w * w;
  const double v1 = right[0], d1 = right[1] * w, s1 = right[2] * w * w;
  const double c0 = v0;
  const double c1 = d0;
  const double c2 = 0.5 * s0;
  const double r0 = v1 - (c0 + c1 + c2);
  const double r1 = d1 - (c1 + 2.0 * c2);
  const double r2 = s1 - 2.0 * c2;
  const double c3 = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
  const double c4 = -15.0 * r0 + 7.0 * r1 - r2;
  const double c5 = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;

  ProfilePiece piece;
  piece.t0 = t0;
  piece.t1 = t1;
  PolyTerm poly;
  poly.anchor = t0;
  const double w2 = w * w;
  poly.coeffs = {c0,          c1 / w,        c2 / w2,
                 c3 / (w2 * w), c4 / (w2 * w2), c5 / (w2 * w2 * w)};
  piece.polys.push_back(std::move(poly));
  return piece;
}

SmoothProfile::SmoothProfile(Closure left, std::vector<ProfilePiece> pieces,
                             Closure right)
    : left_(left), right_(right), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ConstructionError("profile: no pieces");
  length_ = pieces_.back().t1;
  validate();
}

SmoothProfile SmoothProfile::unchecked(Closure left,
                                       std::vector<ProfilePiece> pieces,
                                       Closure right) {
  if (pieces.empty()) throw ConstructionError("profile: no pieces");
  SmoothProfile p;
  p.left_ = left;
  p.right_ = right;
  p.pieces_ = std::move(pieces);
  p.length_ = p.pieces_.back().t1;
  return p;
}

void SmoothProfile::validate() const {
  if (!(length_ > 0.0)) throw ConstructionError("profile: empty domain");
  if (pieces_.front().t0 != 0.0)
    throw ConstructionError("profile: domain must start at 0");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!(pieces_[i].t1 > pieces_[i].t0))
      throw ConstructionError("profile: piece with empty interval");
    if (i + 1 < pieces_.size() &&
        std::abs(pieces_[i].t1 - pieces_[i + 1].t0) >
            kNodeMergeTol * std::max(1.0, length_))
      throw ConstructionError("profile: pieces are not contiguous");
  }
  for (int order = 0; order <= 2; ++order) {
    if (junction_mismatch(order) > kJunctionTol)
      throw ConstructionError("profile: junction mismatch at order " +
                              std::to_string(order));
  }

  // Positivity in the interior, ends per closure flag.
  const double margin = length_ * 1e-6;
  double interior_min = eval(0.5 * length_, 0);
  for (const auto& piece : pieces_) {
    const double a = std::max(piece.t0, margin);
    const double b = std::min(piece.t1, length_ - margin);
    if (!(b > a)) continue;
    constexpr std::size_t kSamples = 512;
    for (std::size_t i = 0; i <= kSamples; ++i) {
      const double t = a + (b - a) * static_cast<double>(i) / kSamples;
      interior_min = std::min(interior_min, piece.eval(t, 0));
    }
  }
  if (!(interior_min > 0.0))
    throw ConstructionError("profile: not positive inside the domain");

  const double scale = std::max(1.0, std::abs(eval(0.5 * length_, 0)));
  if (left_ == Closure::Disk) {
    if (std::abs(eval(0.0, 0)) > kClosureTol * scale ||
        std::abs(eval(0.0, 1) - 1.0) > kClosureTol)
      throw ConstructionError("profile: disk closure needs rho(0)=0, rho'(0)=1");
  } else if (!(eval(0.0, 0) > 0.0)) {
    throw ConstructionError("profile: cylinder end needs rho(0) > 0");
  }
  if (right_ == Closure::Disk) {
    if (std::abs(eval(length_, 0)) > kClosureTol * scale ||
        std::abs(eval(length_, 1) + 1.0) > kClosureTol)
      throw ConstructionError(
          "profile: right disk closure needs rho(L)=0, rho'(L)=-1");
  } else if (!(eval(length_, 0) > 0.0)) {
    throw ConstructionError("profile: cylinder end needs rho(L) > 0");
  }
}

std::size_t SmoothProfile::piece_index(double t) const {
  const double slack = kNodeMergeTol * std::max(1.0, length_);
  if (t < -slack || t > length_ + slack)
    throw DomainError("profile eval: t outside [0, L]");
  t = std::clamp(t, 0.0, length_);
  std::size_t lo = 0, hi = pieces_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (t <= pieces_[mid].t1)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

double SmoothProfile::eval(double t, int order) const {
  const std::size_t i = piece_index(t);
  return pieces_[i].eval(std::clamp(t, 0.0, length_), order);
}

double SmoothProfile::eval_piece(std::size_t index, double t, int order) const {
  if (index >= pieces_.size()) throw DomainError("eval_piece: bad index");
  return pieces_[index].eval(t, order);
}

double SmoothProfile::junction_mismatch(int order) const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    const double t = pieces_[i].t1;
    const double l = pieces_[i].eval(t, order);
    const double r = pieces_[i + 1].eval(t, order);
    const double denom = std::max({1.0, std::abs(l), std::abs(r)});
    worst = std::max(worst, std::abs(l - r) / denom);
  }
  return worst;
}

double SmoothProfile::min_value(double t_from,
                                std::size_t samples_per_piece) const {
  double best = eval(length_, 0);
  for (const auto& piece : pieces_) {
    if (piece.t1 < t_from) continue;
    const double a = std::max(piece.t0, t_from);
    const double b = piece.t1;
    for (std::size_t i = 0; i <= samples_per_piece; ++i) {
      const double t = a + (b - a) * static_cast<double>(i) /
                               static_cast<double>(samples_per_piece);
      best = std::min(best, piece.eval(t, 0));
    }
  }
  return best;
}

bool SmoothProfile::same_representation(const SmoothProfile& other) const {
  if (left_ != other.left_ || right_ != other.right_ ||
      length_ != other.length_ || pieces_.size() != other.pieces_.size())
    return false;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& a = pieces_[i];
    const auto& b = other.pieces_[i];
    if (a.t0 != b.t0 || a.t1 != b.t1 || a.sines.size() != b.sines.size() ||
        a.polys.size() != b.polys.size())
      return false;
    for (std::size_t j = 0; j < a.sines.size(); ++j) {
      if (a.sines[j].amplitude != b.sines[j].amplitude ||
          a.sines[j].delta != b.sines[j].delta ||
          a.sines[j].phase != b.sines[j].phase)
        return false;
    }
    for (std::size_t j = 0; j < a.polys.size(); ++j) {
      if (a.polys[j].anchor != b.polys[j].anchor ||
          a.polys[j].coeffs != b.polys[j].coeffs)
        return false;
    }
  }
  return true;
}

namespace {

void append_scaled_terms(ProfilePiece& dst, const ProfilePiece& src,
                         double scale) {
  if (scale == 0.0) return;
  for (const auto& s : src.sines) {
    bool merged = false;
    for (auto& d : dst.sines) {
      if (d.delta == s.delta && d.phase == s.phase) {
        d.amplitude += scale * s.amplitude;
        merged = true;
        break;
      }
    }
    if (!merged) dst.sines.push_back({scale * s.amplitude, s.delta, s.phase});
  }
  for (const auto& p : src.polys) {
    bool merged = false;
    for (auto& d : dst.polys) {
      if (d.anchor == p.anchor && d.coeffs.size() == p.coeffs.size()) {
        for (std::size_t i = 0; i < p.coeffs.size(); ++i)
          d.coeffs[i] += scale * p.coeffs[i];
        merged = true;
        break;
      }
    }
    if (!merged) {
      PolyTerm t = p;
      for (auto& c : t.coeffs) c *= scale;
      dst.polys.push_back(std::move(t));
    }
  }
}

const ProfilePiece& piece_covering(const SmoothProfile& p, double t) {
  for (const auto& piece : p.pieces()) {
    if (t >= piece.t0 && t <= piece.t1) return piece;
  }
  return p.pieces().back();
}

}  // namespace

SmoothProfile blend_profiles(const SmoothProfile& p1, const SmoothProfile& p2,
                             double lambda) {
  if (lambda == 1.0) return p1;
  if (lambda == 0.0) return p2;
  const double tol = kNodeMergeTol * std::max(1.0, p1.domain_length());
  if (std::abs(p1.domain_length() - p2.domain_length()) > tol)
    throw IncompatibilityError("blend: domain lengths differ");
  if (p1.closure() != p2.closure() || p1.right_closure() != p2.right_closure())
    throw IncompatibilityError("blend: closure flags differ");

  std::vector<double> nodes;
  for (const auto& piece : p1.pieces()) nodes.push_back(piece.t1);
  for (const auto& piece : p2.pieces()) nodes.push_back(piece.t1);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> merged;
  for (double n : nodes) {
    if (merged.empty() || n - merged.back() > tol) merged.push_back(n);
  }
  merged.back() = p1.domain_length();

  std::vector<ProfilePiece> out;
  double left = 0.0;
  for (double right : merged) {
    const double mid = 0.5 * (left + right);
    ProfilePiece combined;
    combined.t0 = left;
    combined.t1 = right;
    append_scaled_terms(combined, piece_covering(p1, mid), lambda);
    append_scaled_terms(combined, piece_covering(p2, mid), 1.0 - lambda);
    out.push_back(std::move(combined));
    left = right;
  }
  return SmoothProfile(p1.closure(), std::move(out), p1.right_closure());
}

SmoothProfile linear_combination(
    const std::vector<const SmoothProfile*>& profiles,
    const std::vector<double>& coeffs) {
  if (profiles.empty() || profiles.size() != coeffs.size())
    throw DomainError("linear_combination: empty or mismatched inputs");
  const SmoothProfile& lead = *profiles.front();
  const double L = lead.domain_length();
  const double tol = kNodeMergeTol * std::max(1.0, L);
  std::vector<double> nodes;
  for (const SmoothProfile* p : profiles) {
    if (std::abs(p->domain_length() - L) > tol)
      throw IncompatibilityError("linear_combination: domain lengths differ");
    for (const auto& piece : p->pieces()) nodes.push_back(piece.t1);
  }
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> merged;
  for (double n : nodes) {
    if (merged.empty() || n - merged.back() > tol) merged.push_back(n);
  }
  merged.back() = L;

  std::vector<ProfilePiece> out;
  double left = 0.0;
  for (double right : merged) {
    const double mid = 0.5 * (left + right);
    ProfilePiece combined;
    combined.t0 = left;
    combined.t1 = right;
    for (std::size_t i = 0; i < profiles.size(); ++i)
      append_scaled_terms(combined, piece_covering(*profiles[i], mid), coeffs[i]);
    out.push_back(std::move(combined));
    left = right;
  }
  return SmoothProfile(lead.closure(), std::move(out), lead.right_closure());
}

SmoothProfile bump_profile(double length, double t_lo, double t_hi) {
  if (!(0.0 <= t_lo && t_lo < t_hi && t_hi <= length))
    throw DomainError("bump_profile: support must sit inside [0, length]");
  const double mid = 0.5 * (t_lo + t_hi);
  std::vector<ProfilePiece> pieces;
  if (t_lo > 0.0) pieces.push_back(make_constant_piece(0.0, t_lo, 0.0));
  pieces.push_back(hermite_quintic(t_lo, mid, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}));
  pieces.push_back(hermite_quintic(mid, t_hi, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}));
  if (t_hi < length) pieces.push_back(make_constant_piece(t_hi, length, 0.0));
  return SmoothProfile::unchecked(Closure::Cylinder, std::move(pieces));
}

SmoothProfile convex_combine(const SmoothProfile& p1, const SmoothProfile& p2,
                             double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw DomainError("convex_combine: lambda outside [0,1]");
  const double tol = kNodeMergeTol * std::max(1.0, p1.domain_length());
  if (std::abs(p1.domain_length() - p2.domain_length()) > tol)
    throw IncompatibilityError("convex_combine: domain lengths differ");
  if (p1.closure() != p2.closure() || p1.right_closure() != p2.right_closure())
    throw IncompatibilityError("convex_combine: closure flags differ");
  // Fixed-delta contract: every sine carrier across both profiles must share
  // one delta. Cross-delta combination is unsupported.
  double delta = 0.0;
  for (const SmoothProfile* p : {&p1, &p2}) {
    for (const auto& piece : p->pieces()) {
      for (const auto& s : piece.sines) {
        if (s.amplitude == 0.0) continue;
        const double d = std::abs(s.delta);
        if (delta == 0.0) {
          delta = d;
        } else if (std::abs(d - delta) > kNodeMergeTol * delta) {
          throw IncompatibilityError(
              "convex_combine: profiles carry different sine deltas");
        }
      }
    }
  }
  return blend_profiles(p1, p2, lambda);
}

SmoothProfile mirror(const SmoothProfile& p) {
  const double L = p.domain_length();
  std::vector<ProfilePiece> out;
  for (auto it = p.pieces().rbegin(); it != p.pieces().rend(); ++it) {
    ProfilePiece m;
    m.t0 = L - it->t1;
    m.t1 = L - it->t0;
    for (const auto& s : it->sines) {
      // A sin((L-t)/d + phi) = A sin(t/d + (pi - L/d - phi)), using
      // sin(pi - u) = sin(u).
      m.sines.push_back(
          {s.amplitude, s.delta, std::numbers::pi - L / s.delta - s.phase});
    }
    for (const auto& poly : it->polys) {
      PolyTerm t;
      t.anchor = L - poly.anchor;
      t.coeffs = poly.coeffs;
      for (std::size_t i = 1; i < t.coeffs.size(); i += 2)
        t.coeffs[i] = -t.coeffs[i];
      m.polys.push_back(std::move(t));
    }
    out.push_back(std::move(m));
  }
  // Fix the first piece to start at exactly 0 (L - L may carry roundoff).
  out.front().t0 = 0.0;
  return SmoothProfile::unchecked(p.right_closure(), std::move(out),
                                  p.closure());
}

double smoothstep01(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep01_d1(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double a = u * (1.0 - u);
  return 30.0 * a * a;
}

double smoothstep01_d2(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

double Cutoff::operator()(double s) const {
  if (s < alpha) return 1.0;
  if (s > 2.0 * alpha) return 0.0;
  return 1.0 - smoothstep01((s - alpha) / alpha);
}

double Cutoff::derivative(double s) const {
  if (s <= alpha || s >= 2.0 * alpha) return 0.0;
  return -smoothstep01_d1((s - alpha) / alpha) / alpha;
}

double Cutoff::second_derivative(double s) const {
  if (s <= alpha || s >= 2.0 * alpha) return 0.0;
  return -smoothstep01_d2((s - alpha) / alpha) / (alpha * alpha);
}

Cutoff make_cutoff(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("make_cutoff: alpha must be positive");
  return Cutoff{alpha};
}

}  // namespace pscforge::smoothfn
