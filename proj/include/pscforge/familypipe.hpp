#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pscforge/curvature.hpp"
#include "pscforge/glsurgery.hpp"
#include "pscforge/morsefold.hpp"
#include "pscforge/smoothfn.hpp"

namespace pscforge::familypipe {

using curvature::DoublyWarpedMetric;
using curvature::ProductMetric;
using curvature::PscReport;
using glsurgery::CobordismMetric;
using glsurgery::SurgeryDatum;
using morsefold::FoldMap;
using morsefold::MorsePair;
using smoothfn::SmoothProfile;

// ---------------------------------------------------------------------------
// Sampled parameter base with chart overlaps
// ---------------------------------------------------------------------------

// One parameter chart: an interval of base parameters with sample stations.
struct ChartBox {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> samples;  // strictly increasing, inside [lo, hi]
};

// The same base point seen from two charts. The frame is the fiber
// coordinate change between the charts: blockdiag(Q-, Q+) with
// Q- in O(p+1) acting on the first block and Q+ in O(q+1) on the second.
struct OverlapSample {
  std::size_t chart_a = 0;
  std::size_t sample_a = 0;
  std::size_t chart_b = 0;
  std::size_t sample_b = 0;
  Eigen::MatrixXd frame;  // (p+q+2) x (p+q+2)
};

struct BaseSampleSet {
  int p = 1;
  int q = 2;
  std::vector<ChartBox> charts;
  std::vector<OverlapSample> overlaps;

  int frame_dim() const { return p + q + 2; }
  std::size_t sample_count() const;
  // Chart-major flat index of (chart, sample); bounds-checked.
  std::size_t flat_index(std::size_t chart, std::size_t sample) const;
};

// Structural invariants: at least one chart, samples strictly increasing
// inside their boxes (DomainError); frames square of the right size,
// orthogonal to 1e-12, with exactly zero off-diagonal blocks
// (IncompatibilityError).
void validate(const BaseSampleSet& base);

// blockdiag(q_minus, q_plus).
Eigen::MatrixXd block_frame(const Eigen::MatrixXd& q_minus,
                            const Eigen::MatrixXd& q_plus);

// Seeded orthogonal frame: Householder QR of Gaussian blocks.
Eigen::MatrixXd random_block_frame(int p, int q, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Fiberwise data
// ---------------------------------------------------------------------------

// Everything the pipeline needs for one base sample: the fold map of the
// fiberwise function, the boundary metric in warped representation, the
// surgery parameters, and an optional background metric in fold coordinates
// (empty selects the canonical 2*I).
struct FiberSample {
  FoldMap fold;
  DoublyWarpedMetric g0;
  SurgeryDatum datum;
  Eigen::MatrixXd background;
};

struct FiberFamily {
  std::vector<std::vector<FiberSample>> samples;  // [chart][sample]
};

// Round unit-sphere boundary fixture: a = sin t, b = cos t on [0, pi/2]
// (a closes a disk on the left, b closes the surgery sphere on the right).
DoublyWarpedMetric round_sphere_boundary(int p, int q);

// Two charts covering a circle of parameters ([0, pi] and [pi, 2*pi]) with
// seeded rotation frames on both overlaps; the outermost sample of each
// chart is the head of the other.
BaseSampleSet make_two_chart_base(int p, int q, int samples_per_chart,
                                  std::uint64_t seed = 42);

// Round-sphere family over the base with the neck width varying smoothly
// and periodically between delta_lo and delta_hi (constant when they are
// equal). Folds are the standard ones of index p+1.
FiberFamily make_demo_family(const BaseSampleSet& base, double delta_lo,
                             double delta_hi, double epsilon = 0.4);

// ---------------------------------------------------------------------------
// Metric samples and frame invariance
// ---------------------------------------------------------------------------

// Metric data at an ambient fiber point. The construction reads the point
// only through the radial coordinates; directions enter only the embedding
// of the sphere-factor Gram blocks.
struct MetricSample {
  double r_minus = 0.0;
  double r_plus = 0.0;
  double warp_minus = 0.0;
  double warp_plus = 0.0;
  double scalar = 0.0;
  Eigen::MatrixXd gram;
};

// Product handle at (x-, x+) in D^{p+1} x D^{q+1}: each factor pulls back to
// its ambient block as u u^T + (rho(r)/r)^2 (I - u u^T), r = |x|, u = x/r.
MetricSample sample_handle_metric(const ProductMetric& handle,
                                  const Eigen::VectorXd& x_minus,
                                  const Eigen::VectorXd& x_plus);

// Assembly at position s in the chart S^p x D^{q+1} around the surgery
// locus: u is the S^p direction (normalized internally), x_plus the
// normal-disk coordinate; the fiber radial coordinate is the distance
// fiber_length - |x_plus| from the disk center.
MetricSample sample_assembly_metric(const CobordismMetric& m, double s,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& x_plus);

// Largest change of the metric sample when the fiber coordinates are
// rotated by the frame: radial data plus the Gram matrix conjugated back.
// Zero to roundoff for any block-diagonal orthogonal frame.
double handle_frame_residual(const ProductMetric& handle,
                             const Eigen::VectorXd& x_minus,
                             const Eigen::VectorXd& x_plus,
                             const Eigen::MatrixXd& frame);
double assembly_frame_residual(const CobordismMetric& m, double s,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& x_plus,
                               const Eigen::MatrixXd& frame);

// ---------------------------------------------------------------------------
// Family pipeline
// ---------------------------------------------------------------------------

struct FamilyParams {
  glsurgery::NeckOptions neck{};
  glsurgery::AssemblyParams assembly{};
  double overlap_tol = 1e-12;
};

struct SampleId {
  std::size_t chart = 0;
  std::size_t sample = 0;
};

// Per-sample assemblies in chart-major order.
struct FamilyBuild {
  std::vector<std::size_t> offsets;  // flat start index per chart
  std::vector<CobordismMetric> fibers;
  std::size_t flat(std::size_t chart, std::size_t sample) const;
};

// Validates the base, gates fold admissibility (index <= n-2, exact integer
// check, before any metric work -> AdmissibilityError), checks fold/surgery
// consistency and background compatibility (IncompatibilityError), requires
// psc boundary metrics (DomainError), then builds every fiber assembly.
// A failing neck search propagates NeckInfeasible naming the sample.
FamilyBuild build_family_fibers(const FiberFamily& fam,
                                const BaseSampleSet& base,
                                const FamilyParams& params = {});

struct SampleReport {
  SampleId id;
  double parameter = 0.0;
  bool extends_boundary = false;         // fiber(0) is g0, structurally
  bool product_near_boundaries = false;  // bitwise below, schedule-flat above
  bool psc = false;
  PscReport scan;

  bool pass() const {
    return extends_boundary && product_near_boundaries && psc;
  }
};

struct OverlapResidual {
  std::size_t overlap = 0;  // index into base.overlaps
  double residual = 0.0;    // after frame alignment
};

// Adjacent-sample output difference within one chart.
struct ContinuityRow {
  SampleId left;
  SampleId right;
  double dz = 0.0;
  double difference = 0.0;  // sup over metric-data stations
  double modulus = 0.0;     // difference / dz
};

struct FamilyMetricReport {
  std::vector<SampleReport> samples;  // chart-major order
  std::vector<OverlapResidual> overlaps;
  std::vector<ContinuityRow> continuity;
  double overlap_tol = 1e-12;
  double max_overlap_residual = 0.0;
  double lipschitz_modulus = 0.0;  // max continuity modulus
  double min_scalar = 0.0;
  bool aggregate_pass = false;
};

// Frame-aligned metric-sample differences at every overlap. Identity frames
// give exactly zero; any block-diagonal orthogonal frame stays under 1e-12.
std::vector<OverlapResidual> overlap_consistency(const BaseSampleSet& base,
                                                 const FamilyBuild& build);

// Full pipeline: build every fiber, check the per-sample conclusion triple
// (extends the boundary metric / product near both boundaries / psc), the
// overlap residuals, and the measured continuity moduli.
FamilyMetricReport run_family(const FiberFamily& fam,
                              const BaseSampleSet& base,
                              const FamilyParams& params = {});

// ---------------------------------------------------------------------------
// Compatible backgrounds
// ---------------------------------------------------------------------------

// Per-sample background metrics in fold coordinates (canonical 2*I when a
// sample does not provide one), with midpoint convex blends across adjacent
// samples checked for compatibility with both endpoint folds. Failures are
// reported, not thrown.
struct BackgroundBuild {
  std::vector<std::vector<MorsePair>> pairs;  // [chart][sample]
  std::vector<bool> sample_ok;                // chart-major, per sample
  std::vector<bool> blend_ok;  // chart-major, per adjacent in-chart pair
  bool all_compatible = true;
};

BackgroundBuild build_compatible_backgrounds(const FiberFamily& fam);

// ---------------------------------------------------------------------------
// Sphere-bundle assembly
// ---------------------------------------------------------------------------

// Fiberwise metric on the sphere fiber: the disk-bundle half (a capped
// cylinder whose plateau sphere has the cap radius) together with its
// mirrored copy. Evaluation folds the coordinate about the equator, so the
// mirror identity holds bitwise by construction.
class SphereFiberMetric {
 public:
  // half_from_equator lives on [0, C]: a positive start at the equator with
  // zero slope (checked), closing a disk at the right end. cap_start marks
  // where the cap region begins in that coordinate (for region labels).
  SphereFiberMetric(int q, SmoothProfile half_from_equator, double cap_radius,
                    double cap_start);

  int q() const { return q_; }
  int k() const { return q_ + 1; }  // fiber dimension
  double equator() const { return half_.domain_length(); }
  double total_length() const { return 2.0 * half_.domain_length(); }
  double cap_radius() const { return cap_radius_; }
  const SmoothProfile& half() const { return half_; }

  // Warp radius and derivatives of the folded profile; odd orders carry the
  // mirror sign.
  double radius(double r, int order = 0) const;
  double scalar(double r) const;

  // Same data indexed by the signed offset from the equator. Evaluation
  // reads |s| only, so opposite offsets agree bitwise for every double s
  // (odd orders up to sign).
  double radius_at_offset(double s, int order = 0) const;
  double scalar_at_offset(double s) const;

  // 1D scan over [0, total], poles included via the analytic closure limits.
  PscReport scan(int grid = 512) const;

 private:
  int q_ = 2;
  SmoothProfile half_;
  double cap_radius_ = 0.0;
  double cap_start_ = 0.0;
};

struct SphereBundleParams {
  double eta = 0.2;
  double collar = -1.0;  // half-length of the equatorial band; < 0 -> 2 * b
  int grid = 512;
  double match_tol = 1e-10;  // cap radius vs boundary sphere radius
  double overlap_tol = 1e-12;
};

// One sample's sphere fiber: the cap profile is pinned to the cap radius
// exactly, and the sample's boundary sphere radius (the plateau of its
// neck-width capped cylinder) must match cap_radius within match_tol,
// otherwise GluingError.
SphereFiberMetric build_sphere_fiber(const FiberSample& sample,
                                     double cap_radius,
                                     const SphereBundleParams& params = {});

// Sphere-factor metric data at arclength r and ambient direction w: the
// Gram block is radius(r)^2 (I - w w^T / |w|^2).
MetricSample sample_sphere_metric(const SphereFiberMetric& f, double r,
                                  const Eigen::VectorXd& w);

struct SphereFiberReport {
  SampleId id;
  double parameter = 0.0;
  bool mirror_exact = false;  // bitwise agreement at mirrored stations
  double cap_mismatch = 0.0;  // |boundary sphere radius - cap radius|
  bool psc = false;
  PscReport scan;

  bool pass() const { return mirror_exact && psc; }
};

struct SphereBundleReport {
  double cap_radius = 0.0;
  std::vector<SphereFiberReport> fibers;  // chart-major order
  std::vector<OverlapResidual> overlaps;
  double overlap_tol = 1e-12;
  double max_overlap_residual = 0.0;
  double min_scalar = 0.0;
  bool aggregate_pass = false;
};

// Builds every sample's sphere fiber, checks the mirror identity and psc,
// and measures overlap residuals through the q-side frame blocks.
SphereBundleReport assemble_sphere_bundle(const FiberFamily& fam,
                                          const BaseSampleSet& base,
                                          double cap_radius,
                                          const SphereBundleParams& params = {});

}  // namespace pscforge::familypipe
