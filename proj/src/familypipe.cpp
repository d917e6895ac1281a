#include "pscforge/familypipe.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "pscforge/errors.hpp"
#include "pscforge/parallel.hpp"

namespace pscforge::familypipe {

namespace {

constexpr double kFrameOrthTol = 1e-12;
constexpr int kBoundaryScanGrid = 128;

// Station fractions used for overlap and continuity sampling. They sit in
// the smooth interior of every region, away from profile junctions.
constexpr std::array<double, 3> kTimeFracs{0.25, 0.55, 0.85};
constexpr std::array<double, 2> kRadiusFracs{0.35, 0.6};
constexpr std::array<double, 3> kContinuityTimeFracs{0.15, 0.45, 0.8};
constexpr std::array<double, 3> kContinuityRadiusFracs{0.3, 0.55, 0.8};

std::string sample_tag(std::size_t chart, std::size_t sample) {
  return "chart " + std::to_string(chart) + ", sample " +
         std::to_string(sample);
}

// Deterministic unit vector; the salt decorrelates stations.
Eigen::VectorXd direction(int dim, int salt) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i)
    v[i] = std::sin(0.9 + 1.3 * i + 2.1 * salt) + 0.05;
  if (v.norm() < 1e-3) v[0] += 1.0;
  v.normalize();
  return v;
}

void check_frame(const Eigen::MatrixXd& frame, int p, int q) {
  const int dm = p + 1;
  const int n = p + q + 2;
  if (frame.rows() != n || frame.cols() != n)
    throw IncompatibilityError(
        "overlap frame must be " + std::to_string(n) + "x" +
        std::to_string(n) + ", got " + std::to_string(frame.rows()) + "x" +
        std::to_string(frame.cols()));
  for (int i = 0; i < dm; ++i)
    for (int j = dm; j < n; ++j)
      if (frame(i, j) != 0.0 || frame(j, i) != 0.0)
        throw IncompatibilityError(
            "overlap frame mixes the two sphere blocks at entry (" +
            std::to_string(i) + ", " + std::to_string(j) + ")");
  const double orth =
      (frame.transpose() * frame - Eigen::MatrixXd::Identity(n, n))
          .cwiseAbs()
          .maxCoeff();
  if (orth > kFrameOrthTol)
    throw IncompatibilityError(
        "overlap frame is not orthogonal: |Q^T Q - I| = " +
        std::to_string(orth));
}

// Pullback of dr^2 + warp(r)^2 ds^2 to the ambient block at x (r = |x|):
// u u^T + (warp/r)^2 (I - u u^T).
Eigen::MatrixXd disk_block(double warp, double r, const Eigen::VectorXd& x) {
  const Eigen::VectorXd u = x / r;
  const double tang = (warp / r) * (warp / r);
  const Eigen::MatrixXd uu = u * u.transpose();
  return uu + tang * (Eigen::MatrixXd::Identity(x.size(), x.size()) - uu);
}

// Round-sphere tangential block warp^2 (I - u u^T) at direction x.
Eigen::MatrixXd sphere_block(double warp, const Eigen::VectorXd& x) {
  const Eigen::VectorXd u = x.normalized();
  return (warp * warp) *
         (Eigen::MatrixXd::Identity(x.size(), x.size()) - u * u.transpose());
}

double data_difference(const MetricSample& a, const MetricSample& b) {
  double d = std::abs(a.r_minus - b.r_minus);
  d = std::max(d, std::abs(a.r_plus - b.r_plus));
  d = std::max(d, std::abs(a.warp_minus - b.warp_minus));
  d = std::max(d, std::abs(a.warp_plus - b.warp_plus));
  d = std::max(d, std::abs(a.scalar - b.scalar));
  return d;
}

double aligned_gram_difference(const MetricSample& a, const MetricSample& b,
                               const Eigen::MatrixXd& frame) {
  return (frame.transpose() * b.gram * frame - a.gram)
      .cwiseAbs()
      .maxCoeff();
}

Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
}

void check_family_shape(const FiberFamily& fam, const BaseSampleSet& base) {
  if (fam.samples.size() != base.charts.size())
    throw IncompatibilityError(
        "family has " + std::to_string(fam.samples.size()) +
        " chart rows but the base has " + std::to_string(base.charts.size()) +
        " charts");
  for (std::size_t c = 0; c < base.charts.size(); ++c)
    if (fam.samples[c].size() != base.charts[c].samples.size())
      throw IncompatibilityError(
          "chart " + std::to_string(c) + ": family has " +
          std::to_string(fam.samples[c].size()) + " fiber samples but the "
          "base has " + std::to_string(base.charts[c].samples.size()));
}

// Exact integer check, before any metric work.
void admissibility_gate(const FiberFamily& fam) {
  for (std::size_t c = 0; c < fam.samples.size(); ++c)
    for (std::size_t i = 0; i < fam.samples[c].size(); ++i) {
      const FoldMap& f = fam.samples[c][i].fold;
      if (f.index() > f.n() - 2)
        throw AdmissibilityError(
            sample_tag(c, i) + ": fold index " + std::to_string(f.index()) +
            " exceeds the admissible bound n-2 = " +
            std::to_string(f.n() - 2));
    }
}

void consistency_gate(const FiberFamily& fam, const BaseSampleSet& base) {
  for (std::size_t c = 0; c < fam.samples.size(); ++c)
    for (std::size_t i = 0; i < fam.samples[c].size(); ++i) {
      const FiberSample& fs = fam.samples[c][i];
      glsurgery::validate(fs.datum);
      if (fs.datum.p != base.p || fs.datum.q != base.q)
        throw IncompatibilityError(
            sample_tag(c, i) + ": surgery block sizes (p, q) = (" +
            std::to_string(fs.datum.p) + ", " + std::to_string(fs.datum.q) +
            ") do not match the base frames (" + std::to_string(base.p) +
            ", " + std::to_string(base.q) + ")");
      const int n = fs.datum.p + fs.datum.q + 1;
      if (fs.fold.n() != n)
        throw IncompatibilityError(
            sample_tag(c, i) + ": fold dimension parameter " +
            std::to_string(fs.fold.n()) + " does not match p+q+1 = " +
            std::to_string(n));
      if (fs.fold.index() != fs.datum.p + 1)
        throw IncompatibilityError(
            sample_tag(c, i) + ": fold index " +
            std::to_string(fs.fold.index()) +
            " does not match the handle index p+1 = " +
            std::to_string(fs.datum.p + 1));
    }
}

std::vector<std::size_t> chart_offsets(const BaseSampleSet& base) {
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const auto& chart : base.charts) {
    offsets.push_back(at);
    at += chart.samples.size();
  }
  return offsets;
}

}  // namespace

// ---------------------------------------------------------------------------
// BaseSampleSet
// ---------------------------------------------------------------------------

std::size_t BaseSampleSet::sample_count() const {
  std::size_t n = 0;
  for (const auto& chart : charts) n += chart.samples.size();
  return n;
}

std::size_t BaseSampleSet::flat_index(std::size_t chart,
                                      std::size_t sample) const {
  if (chart >= charts.size())
    throw DomainError("chart index " + std::to_string(chart) +
                      " out of range");
  if (sample >= charts[chart].samples.size())
    throw DomainError("sample index " + std::to_string(sample) +
                      " out of range in chart " + std::to_string(chart));
  std::size_t at = 0;
  for (std::size_t c = 0; c < chart; ++c) at += charts[c].samples.size();
  return at + sample;
}

void validate(const BaseSampleSet& base) {
  if (base.p < 0 || base.q < 0)
    throw DomainError("base sample set: sphere dimensions must be >= 0");
  if (base.charts.empty())
    throw DomainError("base sample set: at least one chart required");
  for (std::size_t c = 0; c < base.charts.size(); ++c) {
    const ChartBox& chart = base.charts[c];
    if (!(chart.hi > chart.lo))
      throw DomainError("chart " + std::to_string(c) +
                        ": parameter box must have positive length");
    if (chart.samples.empty())
      throw DomainError("chart " + std::to_string(c) +
                        ": at least one sample required");
    for (std::size_t i = 0; i < chart.samples.size(); ++i) {
      const double z = chart.samples[i];
      if (!(z >= chart.lo) || !(z <= chart.hi))
        throw DomainError("chart " + std::to_string(c) + ": sample " +
                          std::to_string(i) + " lies outside its box");
      if (i > 0 && !(z > chart.samples[i - 1]))
        throw DomainError("chart " + std::to_string(c) +
                          ": samples must be strictly increasing");
    }
  }
  for (std::size_t k = 0; k < base.overlaps.size(); ++k) {
    const OverlapSample& o = base.overlaps[k];
    if (o.chart_a >= base.charts.size() || o.chart_b >= base.charts.size())
      throw DomainError("overlap " + std::to_string(k) +
                        ": chart index out of range");
    if (o.sample_a >= base.charts[o.chart_a].samples.size() ||
        o.sample_b >= base.charts[o.chart_b].samples.size())
      throw DomainError("overlap " + std::to_string(k) +
                        ": sample index out of range");
    check_frame(o.frame, base.p, base.q);
  }
}

Eigen::MatrixXd block_frame(const Eigen::MatrixXd& q_minus,
                            const Eigen::MatrixXd& q_plus) {
  if (q_minus.rows() != q_minus.cols() || q_plus.rows() != q_plus.cols())
    throw DomainError("block_frame: blocks must be square");
  const Eigen::Index n = q_minus.rows() + q_plus.rows();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  f.topLeftCorner(q_minus.rows(), q_minus.rows()) = q_minus;
  f.bottomRightCorner(q_plus.rows(), q_plus.rows()) = q_plus;
  return f;
}

Eigen::MatrixXd random_block_frame(int p, int q, std::uint64_t seed) {
  if (p < 0 || q < 0)
    throw DomainError("random_block_frame: sphere dimensions must be >= 0");
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd qm = random_orthogonal(p + 1, rng);
  const Eigen::MatrixXd qp = random_orthogonal(q + 1, rng);
  return block_frame(qm, qp);
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

DoublyWarpedMetric round_sphere_boundary(int p, int q) {
  if (p < 0 || q < 1)
    throw DomainError("round_sphere_boundary: need p >= 0 and q >= 1");
  const double half_pi = std::numbers::pi / 2.0;
  SmoothProfile a(smoothfn::Closure::Disk,
                  {smoothfn::make_sine_piece(0.0, half_pi, 1.0, 1.0, 0.0)},
                  smoothfn::Closure::Cylinder);
  SmoothProfile b(smoothfn::Closure::Cylinder,
                  {smoothfn::make_sine_piece(0.0, half_pi, 1.0, 1.0, half_pi)},
                  smoothfn::Closure::Disk);
  return {p, q, std::move(a), std::move(b)};
}

BaseSampleSet make_two_chart_base(int p, int q, int samples_per_chart,
                                  std::uint64_t seed) {
  if (samples_per_chart < 2)
    throw DomainError("make_two_chart_base: need at least 2 samples per chart");
  const double pi = std::numbers::pi;
  BaseSampleSet base;
  base.p = p;
  base.q = q;
  ChartBox east{"east", 0.0, pi, {}};
  ChartBox west{"west", pi, 2.0 * pi, {}};
  for (int i = 0; i < samples_per_chart; ++i) {
    const double f =
        static_cast<double>(i) / static_cast<double>(samples_per_chart - 1);
    east.samples.push_back(pi * f);
    west.samples.push_back(pi + pi * f);
  }
  base.charts = {std::move(east), std::move(west)};
  const std::size_t last = static_cast<std::size_t>(samples_per_chart - 1);
  base.overlaps.push_back({0, last, 1, 0, random_block_frame(p, q, seed)});
  base.overlaps.push_back({1, last, 0, 0, random_block_frame(p, q, seed + 1)});
  return base;
}

FiberFamily make_demo_family(const BaseSampleSet& base, double delta_lo,
                             double delta_hi, double epsilon) {
  if (!(delta_lo > 0.0) || !(delta_hi > 0.0))
    throw DomainError("make_demo_family: neck widths must be positive");
  const double two_pi = 2.0 * std::numbers::pi;
  const int n = base.p + base.q + 1;
  FiberFamily fam;
  for (const auto& chart : base.charts) {
    std::vector<FiberSample> row;
    row.reserve(chart.samples.size());
    for (double z : chart.samples) {
      // Periodic in the global parameter, so the two descriptions of a
      // wrapped-around base point carry bitwise-equal data.
      const double phi = std::fmod(z, two_pi);
      const double delta =
          delta_lo + (delta_hi - delta_lo) * 0.5 * (1.0 - std::cos(phi));
      row.push_back({morsefold::standard_fold(1, n, base.p + 1, 0.5),
                     round_sphere_boundary(base.p, base.q),
                     SurgeryDatum{base.p, base.q, epsilon, delta},
                     Eigen::MatrixXd()});
    }
    fam.samples.push_back(std::move(row));
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Metric samples and frame invariance
// ---------------------------------------------------------------------------

MetricSample sample_handle_metric(const ProductMetric& handle,
                                  const Eigen::VectorXd& x_minus,
                                  const Eigen::VectorXd& x_plus) {
  const auto& f1 = handle.f1;
  const auto& f2 = handle.f2;
  if (x_minus.size() != f1.k || x_plus.size() != f2.k)
    throw DomainError("handle sample point has the wrong block sizes");
  const double r1 = x_minus.norm();
  const double r2 = x_plus.norm();
  if (!(r1 > 0.0) || !(r1 < f1.profile.domain_length()) || !(r2 > 0.0) ||
      !(r2 < f2.profile.domain_length()))
    throw DomainError("handle sample point must be strictly inside both disks");
  MetricSample s;
  s.r_minus = r1;
  s.r_plus = r2;
  s.warp_minus = f1.profile.eval(r1, 0);
  s.warp_plus = f2.profile.eval(r2, 0);
  s.scalar = curvature::scalar_product(handle, r1, r2);
  s.gram = Eigen::MatrixXd::Zero(f1.k + f2.k, f1.k + f2.k);
  s.gram.topLeftCorner(f1.k, f1.k) = disk_block(s.warp_minus, r1, x_minus);
  s.gram.bottomRightCorner(f2.k, f2.k) = disk_block(s.warp_plus, r2, x_plus);
  return s;
}

MetricSample sample_assembly_metric(const CobordismMetric& m, double s,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& x_plus) {
  const auto& block = m.path().block;
  const int p = block.p();
  const int q = block.q();
  if (u.size() != p + 1 || x_plus.size() != q + 1)
    throw DomainError("assembly sample point has the wrong block sizes");
  if (s < 0.0 || s > m.total_length())
    throw DomainError("assembly sample position outside the cobordism");
  const double l = block.fiber_length();
  const double rho = x_plus.norm();
  if (!(rho > 0.0) || !(rho < l))
    throw DomainError(
        "normal-disk coordinate must be strictly inside the disk");
  const double un = u.norm();
  if (!(un > 0.0))
    throw DomainError("sphere direction must be nonzero");
  const double r = l - rho;  // profile coordinate; the disk centre sits at r = l
  const auto warp = m.radii(s, r);
  MetricSample out;
  out.r_minus = un;
  out.r_plus = rho;
  out.warp_minus = warp[0];
  out.warp_plus = warp[1];
  out.scalar = m.scalar(s, r);
  out.gram = Eigen::MatrixXd::Zero(p + q + 2, p + q + 2);
  out.gram.topLeftCorner(p + 1, p + 1) = sphere_block(warp[0], u);
  out.gram.bottomRightCorner(q + 1, q + 1) =
      disk_block(warp[1], rho, x_plus);
  return out;
}

double handle_frame_residual(const ProductMetric& handle,
                             const Eigen::VectorXd& x_minus,
                             const Eigen::VectorXd& x_plus,
                             const Eigen::MatrixXd& frame) {
  check_frame(frame, handle.f1.k - 1, handle.f2.k - 1);
  const MetricSample a = sample_handle_metric(handle, x_minus, x_plus);
  const MetricSample b = sample_handle_metric(
      handle, frame.topLeftCorner(handle.f1.k, handle.f1.k) * x_minus,
      frame.bottomRightCorner(handle.f2.k, handle.f2.k) * x_plus);
  return std::max(data_difference(a, b), aligned_gram_difference(a, b, frame));
}

double assembly_frame_residual(const CobordismMetric& m, double s,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& x_plus,
                               const Eigen::MatrixXd& frame) {
  const auto& block = m.path().block;
  check_frame(frame, block.p(), block.q());
  const MetricSample a = sample_assembly_metric(m, s, u, x_plus);
  const MetricSample b = sample_assembly_metric(
      m, s, frame.topLeftCorner(block.p() + 1, block.p() + 1) * u,
      frame.bottomRightCorner(block.q() + 1, block.q() + 1) * x_plus);
  return std::max(data_difference(a, b), aligned_gram_difference(a, b, frame));
}

// ---------------------------------------------------------------------------
// Family pipeline
// ---------------------------------------------------------------------------

std::size_t FamilyBuild::flat(std::size_t chart, std::size_t sample) const {
  if (chart >= offsets.size())
    throw DomainError("chart index out of range in family build");
  const std::size_t idx = offsets[chart] + sample;
  const std::size_t end =
      chart + 1 < offsets.size() ? offsets[chart + 1] : fibers.size();
  if (idx >= end)
    throw DomainError("sample index out of range in family build");
  return idx;
}

FamilyBuild build_family_fibers(const FiberFamily& fam,
                                const BaseSampleSet& base,
                                const FamilyParams& params) {
  validate(base);
  check_family_shape(fam, base);
  admissibility_gate(fam);
  consistency_gate(fam, base);

  const BackgroundBuild backgrounds = build_compatible_backgrounds(fam);
  if (!backgrounds.all_compatible)
    throw IncompatibilityError(
        "family backgrounds: a sample background or an adjacent blend fails "
        "the fold compatibility check");

  for (std::size_t c = 0; c < fam.samples.size(); ++c)
    for (std::size_t i = 0; i < fam.samples[c].size(); ++i) {
      const auto rep =
          curvature::min_scan(fam.samples[c][i].g0, kBoundaryScanGrid);
      if (!rep.positive())
        throw DomainError(sample_tag(c, i) +
                          ": boundary metric is not psc (min scalar " +
                          std::to_string(rep.min_scalar) + ")");
    }

  const std::vector<std::size_t> offsets = chart_offsets(base);
  const std::size_t n = base.sample_count();
  std::vector<std::pair<std::size_t, std::size_t>> where(n);
  for (std::size_t c = 0; c < base.charts.size(); ++c)
    for (std::size_t i = 0; i < base.charts[c].samples.size(); ++i)
      where[offsets[c] + i] = {c, i};

  std::vector<std::optional<CobordismMetric>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, [&](std::size_t idx) {
    const auto [c, i] = where[idx];
    const FiberSample& fs = fam.samples[c][i];
    try {
      const auto path =
          glsurgery::standardize_near_sphere(fs.g0, fs.datum, params.neck);
      slots[idx].emplace(
          glsurgery::build_cobordism_metric(fs.g0, path, params.assembly));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  });

  // Surface the lowest-index failure so the offending sample is stable
  // across worker counts.
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (!errors[idx]) continue;
    const auto [c, i] = where[idx];
    try {
      std::rethrow_exception(errors[idx]);
    } catch (const NeckInfeasible& e) {
      throw NeckInfeasible(sample_tag(c, i) + ": " + e.what());
    }
    // Anything else propagates unchanged out of the rethrow above.
  }

  FamilyBuild out;
  out.offsets = offsets;
  out.fibers.reserve(n);
  for (std::size_t idx = 0; idx < n; ++idx)
    out.fibers.push_back(std::move(*slots[idx]));
  return out;
}

std::vector<OverlapResidual> overlap_consistency(const BaseSampleSet& base,
                                                 const FamilyBuild& build) {
  validate(base);
  if (build.fibers.size() != base.sample_count() ||
      build.offsets.size() != base.charts.size())
    throw DomainError(
        "family build does not cover the base sample set");

  std::vector<OverlapResidual> rows;
  rows.reserve(base.overlaps.size());
  for (std::size_t k = 0; k < base.overlaps.size(); ++k) {
    const OverlapSample& o = base.overlaps[k];
    const CobordismMetric& ma =
        build.fibers[build.flat(o.chart_a, o.sample_a)];
    const CobordismMetric& mb =
        build.fibers[build.flat(o.chart_b, o.sample_b)];
    const Eigen::MatrixXd qm = o.frame.topLeftCorner(base.p + 1, base.p + 1);
    const Eigen::MatrixXd qp =
        o.frame.bottomRightCorner(base.q + 1, base.q + 1);
    const double l = ma.path().block.fiber_length();
    const double total = ma.total_length();
    double res = 0.0;
    int salt = 0;
    for (double sf : kTimeFracs)
      for (double rf : kRadiusFracs) {
        const Eigen::VectorXd u = direction(base.p + 1, salt);
        const Eigen::VectorXd x_plus =
            (rf * l) * direction(base.q + 1, salt + 17);
        ++salt;
        const double s = sf * total;
        const MetricSample sa = sample_assembly_metric(ma, s, u, x_plus);
        const MetricSample sb =
            sample_assembly_metric(mb, s, qm * u, qp * x_plus);
        res = std::max(res, data_difference(sa, sb));
        res = std::max(res, aligned_gram_difference(sa, sb, o.frame));
      }
    rows.push_back({k, res});
  }
  return rows;
}

FamilyMetricReport run_family(const FiberFamily& fam,
                              const BaseSampleSet& base,
                              const FamilyParams& params) {
  const FamilyBuild build = build_family_fibers(fam, base, params);

  FamilyMetricReport rep;
  rep.overlap_tol = params.overlap_tol;
  bool all_pass = true;
  double min_scalar = std::numeric_limits<double>::infinity();

  for (std::size_t c = 0; c < base.charts.size(); ++c)
    for (std::size_t i = 0; i < base.charts[c].samples.size(); ++i) {
      const CobordismMetric& m = build.fibers[build.flat(c, i)];
      const FiberSample& fs = fam.samples[c][i];
      SampleReport sr;
      sr.id = {c, i};
      sr.parameter = base.charts[c].samples[i];
      const auto at0 = m.fiber(0.0);
      sr.extends_boundary = at0.first.same_representation(fs.g0.a) &&
                            at0.second.same_representation(fs.g0.b);
      const auto below = m.fiber(0.5 * m.s_lower());
      sr.product_near_boundaries =
          below.first.same_representation(fs.g0.a) &&
          below.second.same_representation(fs.g0.b) &&
          m.product_above_upper();
      sr.scan = m.scan(0);
      sr.psc = sr.scan.positive();
      min_scalar = std::min(min_scalar, sr.scan.min_scalar);
      all_pass = all_pass && sr.pass();
      rep.samples.push_back(std::move(sr));
    }

  rep.overlaps = overlap_consistency(base, build);
  for (const auto& row : rep.overlaps)
    rep.max_overlap_residual =
        std::max(rep.max_overlap_residual, row.residual);

  for (std::size_t c = 0; c < base.charts.size(); ++c) {
    const auto& zs = base.charts[c].samples;
    for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
      const CobordismMetric& a = build.fibers[build.flat(c, i)];
      const CobordismMetric& b = build.fibers[build.flat(c, i + 1)];
      const double l = a.path().block.fiber_length();
      double diff = 0.0;
      for (double sf : kContinuityTimeFracs)
        for (double rf : kContinuityRadiusFracs) {
          const double s = sf * a.total_length();
          const double r = rf * l;
          const auto ra = a.radii(s, r);
          const auto rb = b.radii(s, r);
          diff = std::max(diff, std::abs(ra[0] - rb[0]));
          diff = std::max(diff, std::abs(ra[1] - rb[1]));
          diff = std::max(diff, std::abs(a.scalar(s, r) - b.scalar(s, r)));
        }
      ContinuityRow row;
      row.left = {c, i};
      row.right = {c, i + 1};
      row.dz = zs[i + 1] - zs[i];
      row.difference = diff;
      row.modulus = diff / row.dz;
      rep.lipschitz_modulus = std::max(rep.lipschitz_modulus, row.modulus);
      rep.continuity.push_back(row);
    }
  }

  rep.min_scalar = min_scalar;
  rep.aggregate_pass =
      all_pass && rep.max_overlap_residual <= params.overlap_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Compatible backgrounds
// ---------------------------------------------------------------------------

BackgroundBuild build_compatible_backgrounds(const FiberFamily& fam) {
  BackgroundBuild out;
  for (const auto& chart : fam.samples) {
    std::vector<MorsePair> row;
    row.reserve(chart.size());
    for (const FiberSample& fs : chart) {
      Eigen::MatrixXd m = fs.background;
      if (m.size() == 0)
        m = 2.0 * Eigen::MatrixXd::Identity(fs.fold.fiber_dim(),
                                            fs.fold.fiber_dim());
      MorsePair pair{fs.fold, std::move(m)};
      out.sample_ok.push_back(morsefold::compat_check(pair));
      row.push_back(std::move(pair));
    }
    out.pairs.push_back(std::move(row));
  }
  for (const auto& row : out.pairs)
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      const MorsePair& a = row[i];
      const MorsePair& b = row[i + 1];
      bool ok = false;
      if (a.background.rows() == b.background.rows() &&
          a.background.cols() == b.background.cols()) {
        const Eigen::MatrixXd mid = 0.5 * (a.background + b.background);
        ok = morsefold::compat_check({a.fold, mid}) &&
             morsefold::compat_check({b.fold, mid});
      }
      out.blend_ok.push_back(ok);
    }
  out.all_compatible =
      std::all_of(out.sample_ok.begin(), out.sample_ok.end(),
                  [](bool b) { return b; }) &&
      std::all_of(out.blend_ok.begin(), out.blend_ok.end(),
                  [](bool b) { return b; });
  return out;
}

// ---------------------------------------------------------------------------
// Sphere-bundle assembly
// ---------------------------------------------------------------------------

SphereFiberMetric::SphereFiberMetric(int q, SmoothProfile half_from_equator,
                                     double cap_radius, double cap_start)
    : q_(q),
      half_(std::move(half_from_equator)),
      cap_radius_(cap_radius),
      cap_start_(cap_start) {
  if (q_ < 2)
    throw DomainError("sphere fiber: need q >= 2 for curved normal spheres");
  if (!(cap_radius_ > 0.0))
    throw DomainError("sphere fiber: cap radius must be positive");
  const double c = half_.domain_length();
  if (!(c > 0.0) || !(cap_start_ >= 0.0) || !(cap_start_ <= c))
    throw DomainError("sphere fiber: cap start must lie inside the half");
  if (half_.closure() != smoothfn::Closure::Cylinder ||
      half_.right_closure() != smoothfn::Closure::Disk)
    throw ConstructionError(
        "sphere fiber: the half must run from the equator to a closed pole");
  for (int order = 0; order <= 2; ++order)
    if (half_.junction_mismatch(order) > 1e-9)
      throw ConstructionError("sphere fiber: half profile junctions exceed "
                              "tolerance at order " + std::to_string(order));
  if (std::abs(half_.eval(0.0, 1)) > 1e-12)
    throw ConstructionError(
        "sphere fiber: the half must be flat at the equator so the mirrored "
        "copy joins smoothly");
  if (std::abs(half_.eval(0.0, 0) - cap_radius_) > 1e-10)
    throw GluingError(
        "sphere fiber: equator radius " + std::to_string(half_.eval(0.0, 0)) +
        " does not match the cap radius " + std::to_string(cap_radius_));
}

double SphereFiberMetric::radius_at_offset(double s, int order) const {
  const double c = half_.domain_length();
  const double m = std::abs(s);
  if (m > c)
    throw DomainError("sphere fiber: offset beyond the poles");
  double v = half_.eval(m, order);
  if (order % 2 == 1 && s < 0.0) v = -v;
  return v;
}

double SphereFiberMetric::scalar_at_offset(double s) const {
  const double c = half_.domain_length();
  const double m = std::abs(s);
  if (m > c)
    throw DomainError("sphere fiber: offset beyond the poles");
  return curvature::scalar_single_warped({k(), half_}, m);
}

double SphereFiberMetric::radius(double r, int order) const {
  return radius_at_offset(r - half_.domain_length(), order);
}

double SphereFiberMetric::scalar(double r) const {
  return scalar_at_offset(r - half_.domain_length());
}

PscReport SphereFiberMetric::scan(int grid) const {
  if (grid < 64)
    throw DomainError("sphere fiber scan: grid must be >= 64");
  const double c = half_.domain_length();
  const double total = total_length();
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(grid) + 1);
  for (int i = 0; i < grid; ++i)
    xs.push_back(total * static_cast<double>(i) / static_cast<double>(grid));
  xs.push_back(total);  // pinned: station rounding must not pass the pole
  const std::vector<double> ys{0.0};
  const std::vector<std::string> names{"left-cap", "left-band", "right-band",
                                       "right-cap"};
  return curvature::grid_scan_2d(
      xs, ys, names, [&](std::size_t i, std::size_t) { return scalar(xs[i]); },
      [&](std::size_t i, std::size_t) {
        const double m = std::abs(xs[i] - c);
        const bool cap = m >= cap_start_;
        const bool left = xs[i] < c;
        return left ? (cap ? 0 : 1) : (cap ? 3 : 2);
      },
      curvature::GridSpec{grid, 1});
}

SphereFiberMetric build_sphere_fiber(const FiberSample& sample,
                                     double cap_radius,
                                     const SphereBundleParams& params) {
  if (!(cap_radius > 0.0))
    throw DomainError("sphere fiber: cap radius must be positive");
  const double boundary_radius =
      glsurgery::plateau_ratio(params.eta) * sample.datum.delta;
  if (std::abs(boundary_radius - cap_radius) > params.match_tol)
    throw GluingError(
        "sphere fiber: boundary sphere radius " +
        std::to_string(boundary_radius) +
        " does not match the requested cap radius " +
        std::to_string(cap_radius) + " within " +
        std::to_string(params.match_tol));
  const double collar =
      params.collar < 0.0 ? 2.0 * cap_radius : params.collar;
  if (!(collar > 0.0))
    throw DomainError("sphere fiber: collar length must be positive");
  // The cap plateau is pinned to cap_radius exactly, so the equatorial band
  // and the caps meet with zero mismatch.
  const SmoothProfile cap =
      glsurgery::torpedo_profile_with_plateau(cap_radius, params.eta, collar);
  return SphereFiberMetric(sample.datum.q, smoothfn::mirror(cap), cap_radius,
                           collar);
}

MetricSample sample_sphere_metric(const SphereFiberMetric& f, double r,
                                  const Eigen::VectorXd& w) {
  if (w.size() != f.q() + 1)
    throw DomainError("sphere sample direction has the wrong size");
  if (!(w.norm() > 0.0))
    throw DomainError("sphere sample direction must be nonzero");
  MetricSample s;
  s.r_plus = r;
  s.warp_plus = f.radius(r);
  s.scalar = f.scalar(r);
  s.gram = sphere_block(s.warp_plus, w);
  return s;
}

SphereBundleReport assemble_sphere_bundle(const FiberFamily& fam,
                                          const BaseSampleSet& base,
                                          double cap_radius,
                                          const SphereBundleParams& params) {
  validate(base);
  check_family_shape(fam, base);
  admissibility_gate(fam);
  consistency_gate(fam, base);

  SphereBundleReport rep;
  rep.cap_radius = cap_radius;
  rep.overlap_tol = params.overlap_tol;
  bool all_pass = true;
  double min_scalar = std::numeric_limits<double>::infinity();

  std::vector<SphereFiberMetric> fibers;
  fibers.reserve(base.sample_count());
  const double ratio = glsurgery::plateau_ratio(params.eta);

  for (std::size_t c = 0; c < base.charts.size(); ++c)
    for (std::size_t i = 0; i < base.charts[c].samples.size(); ++i) {
      const FiberSample& fs = fam.samples[c][i];
      SphereFiberMetric fiber = build_sphere_fiber(fs, cap_radius, params);

      SphereFiberReport fr;
      fr.id = {c, i};
      fr.parameter = base.charts[c].samples[i];
      fr.cap_mismatch = std::abs(ratio * fs.datum.delta - cap_radius);
      fr.scan = fiber.scan(params.grid);
      fr.psc = fr.scan.positive();

      bool mirror_ok = true;
      const double c_len = fiber.equator();
      for (double frac : {0.13, 0.37, 0.71, 0.94}) {
        const double x = frac * c_len;
        mirror_ok = mirror_ok &&
                    fiber.radius_at_offset(x) == fiber.radius_at_offset(-x) &&
                    fiber.scalar_at_offset(x) == fiber.scalar_at_offset(-x) &&
                    fiber.radius_at_offset(x, 1) ==
                        -fiber.radius_at_offset(-x, 1);
      }
      fr.mirror_exact = mirror_ok;

      min_scalar = std::min(min_scalar, fr.scan.min_scalar);
      all_pass = all_pass && fr.pass();
      rep.fibers.push_back(std::move(fr));
      fibers.push_back(std::move(fiber));
    }

  const std::vector<std::size_t> offsets = chart_offsets(base);
  for (std::size_t k = 0; k < base.overlaps.size(); ++k) {
    const OverlapSample& o = base.overlaps[k];
    const SphereFiberMetric& fa = fibers[offsets[o.chart_a] + o.sample_a];
    const SphereFiberMetric& fb = fibers[offsets[o.chart_b] + o.sample_b];
    const Eigen::MatrixXd qp =
        o.frame.bottomRightCorner(base.q + 1, base.q + 1);
    double res = 0.0;
    int salt = 0;
    for (double rf : {0.3, 0.8, 1.2, 1.7}) {
      const double r = rf * fa.equator();
      const Eigen::VectorXd w = direction(base.q + 1, salt++);
      const MetricSample sa = sample_sphere_metric(fa, r, w);
      const MetricSample sb = sample_sphere_metric(fb, r, qp * w);
      res = std::max(res, data_difference(sa, sb));
      res = std::max(
          res, (qp.transpose() * sb.gram * qp - sa.gram).cwiseAbs().maxCoeff());
    }
    rep.overlaps.push_back({k, res});
    rep.max_overlap_residual = std::max(rep.max_overlap_residual, res);
  }

  rep.min_scalar = min_scalar;
  rep.aggregate_pass =
      all_pass && rep.max_overlap_residual <= params.overlap_tol;
  return rep;
}

}  // namespace pscforge::familypipe
