// Batch front-end: build, verify, and export reports for every pipeline.
//
// Exit codes: 0 all checks passed; 1 a check failed (the report carries a
// machine-readable reason); 2 configuration or IO error.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "pscforge/charts.hpp"
#include "pscforge/curvature.hpp"
#include "pscforge/errors.hpp"
#include "pscforge/familypipe.hpp"
#include "pscforge/glsurgery.hpp"
#include "pscforge/jsonio.hpp"
#include "pscforge/morsefold.hpp"
#include "pscforge/oracle.hpp"
#include "pscforge/parallel.hpp"
#include "pscforge/smoothfn.hpp"

using namespace pscforge;
using jsonio::json;

namespace {

struct CommonOpts {
  int threads = 0;             // 0 keeps the library default
  std::uint64_t seed = 42;
  std::string out = ".";
  std::string timestamp;       // empty -> current UTC time
};

void check_resolution(int grid, const std::string& flag) {
  if (grid < 64) throw IoError(flag + " resolution must be >= 64");
}

void check_positive(double v, const std::string& flag) {
  if (!(v > 0.0)) throw IoError(flag + " must be positive");
}

// Config phase shared by every subcommand: worker pool and output directory.
void apply_common(const CommonOpts& c) {
  if (c.threads < 0) throw IoError("--threads must be >= 0");
  if (c.threads > 0) set_worker_count(c.threads);
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create output directory '" + c.out + "'");
}

std::string report_path(const CommonOpts& c, const std::string& tool,
                        const char* ext) {
  std::string name = tool;
  for (char& ch : name)
    if (ch == '-') ch = '_';
  return (std::filesystem::path(c.out) / (name + "_report" + ext)).string();
}

int finish(const std::string& tool, json config, json results,
           const std::string& csv, const CommonOpts& c, bool pass,
           const std::string& summary) {
  const json env =
      jsonio::envelope(tool, std::move(config), std::move(results), c.timestamp);
  const std::string jpath = report_path(c, tool, ".json");
  jsonio::write_text_file(jpath, jsonio::dump_report(env));
  std::cout << summary << " -> " << (pass ? "PASS" : "FAIL") << '\n';
  std::cout << "wrote " << jpath << '\n';
  if (!csv.empty()) {
    const std::string cpath = report_path(c, tool, ".csv");
    jsonio::write_text_file(cpath, csv);
    std::cout << "wrote " << cpath << '\n';
  }
  return pass ? 0 : 1;
}

// A check-phase failure: the report carries the typed reason and the tool
// exits 1 (distinct from config errors, which exit 2).
int fail_report(const std::string& tool, json config, const Error& e,
                const CommonOpts& c) {
  json results{{"error", {{"kind", e.kind()}, {"message", e.what()}}},
               {"pass", false}};
  const json env =
      jsonio::envelope(tool, std::move(config), std::move(results), c.timestamp);
  const std::string jpath = report_path(c, tool, ".json");
  jsonio::write_text_file(jpath, jsonio::dump_report(env));
  std::cout << tool << ": FAIL (" << e.kind() << ") " << e.what() << '\n';
  std::cout << "wrote " << jpath << '\n';
  return 1;
}

// ---------------------------------------------------------------------------
// torpedo
// ---------------------------------------------------------------------------

struct TorpedoOpts {
  CommonOpts common;
  int k = 4;
  double delta = 0.5;
  double eta = 0.2;
  int grid = 512;
};

int cmd_torpedo(const TorpedoOpts& o) {
  apply_common(o.common);
  check_resolution(o.grid, "--grid");
  check_positive(o.delta, "--delta");
  json config{{"k", o.k}, {"delta", o.delta}, {"eta", o.eta}, {"grid", o.grid}};
  try {
    const auto tor = glsurgery::build_torpedo(o.k, o.delta, o.eta);
    const auto check = glsurgery::verify_torpedo(tor.metric(), o.grid);
    const auto scaling = glsurgery::scaling_check(
        o.k, {o.delta, o.delta / 2.0, o.delta / 4.0, o.delta / 10.0}, o.eta,
        o.grid);
    json results{{"profile", jsonio::profile_json(tor.profile)},
                 {"check", jsonio::torpedo_check_json(check)},
                 {"scaling", jsonio::scaling_rows_json(scaling)},
                 {"pass", check.ok()}};
    if (check.degenerate) results["reason"] = "degenerate_plateau";
    std::ostringstream s;
    s << "torpedo: k=" << o.k << " delta=" << o.delta
      << " min_scalar=" << check.scan.min_scalar
      << " plateau=" << check.plateau_value;
    if (check.degenerate) s << " (degenerate: flat cylinder part)";
    const std::string csv =
        jsonio::scan_csv(curvature::scan_rows(tor.metric(), o.grid), 1);
    return finish("torpedo", std::move(config), std::move(results), csv,
                  o.common, check.ok(), s.str());
  } catch (const Error& e) {
    return fail_report("torpedo", std::move(config), e, o.common);
  }
}

// ---------------------------------------------------------------------------
// curvature: closed form vs the finite-difference oracle on a round sphere
// ---------------------------------------------------------------------------

struct CurvatureOpts {
  CommonOpts common;
  int n = 4;
  int grid = 512;
  double tol = 1e-4;
};

int cmd_curvature(const CurvatureOpts& o) {
  apply_common(o.common);
  check_resolution(o.grid, "--grid");
  check_positive(o.tol, "--tol");
  if (o.n < 2) throw IoError("--n must be >= 2");
  json config{{"n", o.n}, {"grid", o.grid}, {"tol", o.tol}};
  try {
    const double pi = std::numbers::pi;
    smoothfn::SmoothProfile profile(
        smoothfn::Closure::Disk,
        {smoothfn::make_sine_piece(0.0, pi, 1.0, 1.0, 0.0)},
        smoothfn::Closure::Disk);
    const curvature::SingleWarpedMetric m{o.n, profile};
    const double expected = static_cast<double>(o.n) * (o.n - 1);

    double exact_err = 0.0;
    for (int i = 1; i < o.grid; ++i) {
      const double t = pi * i / o.grid;
      exact_err = std::max(
          exact_err,
          std::abs(curvature::scalar_single_warped(m, t) - expected));
    }

    const auto chart = charts::single_warped_chart(m, 0.3, pi - 0.3);
    const auto x = charts::chart_center(chart);
    const double h = oracle::default_step(chart);
    const double rel_h =
        std::abs(oracle::scalar(chart, x, h) - expected) / expected;
    const double rel_h2 =
        std::abs(oracle::scalar(chart, x, h / 2.0) - expected) / expected;
    const double ratio = rel_h2 > 0.0 ? rel_h / rel_h2 : 0.0;

    const bool pass = exact_err <= 1e-9 && rel_h <= o.tol;
    json results{{"expected_scalar", expected},
                 {"closed_form_max_abs_err", exact_err},
                 {"oracle_rel_err", rel_h},
                 {"oracle_rel_err_half_step", rel_h2},
                 {"step_halving_ratio", ratio},
                 {"fd_step", h},
                 {"pass", pass}};
    std::ostringstream s;
    s << "curvature: S^" << o.n << " closed-form err=" << exact_err
      << " oracle rel err=" << rel_h << " halving ratio=" << ratio;
    const std::string csv = jsonio::scan_csv(curvature::scan_rows(m, o.grid), 1);
    return finish("curvature", std::move(config), std::move(results), csv,
                  o.common, pass, s.str());
  } catch (const Error& e) {
    return fail_report("curvature", std::move(config), e, o.common);
  }
}

// ---------------------------------------------------------------------------
// neck: standardize near the surgery sphere, then assemble the cobordism
// ---------------------------------------------------------------------------

struct NeckOpts {
  CommonOpts common;
  int p = 1;
  int q = 3;
  double epsilon = 0.4;
  double delta = 0.1;
  glsurgery::NeckOptions neck{};
  int assembly_grid = 192;
};

int cmd_neck(const NeckOpts& o) {
  apply_common(o.common);
  check_resolution(o.neck.grid, "--neck-grid");
  check_resolution(o.neck.block_grid, "--block-grid");
  check_resolution(o.assembly_grid, "--grid");
  json config{{"p", o.p},
              {"q", o.q},
              {"epsilon", o.epsilon},
              {"delta", o.delta},
              {"stages", o.neck.stages},
              {"neck_grid", o.neck.grid},
              {"block_grid", o.neck.block_grid},
              {"length", o.neck.length},
              {"grid", o.assembly_grid}};
  try {
    const auto g0 = familypipe::round_sphere_boundary(o.p, o.q);
    const glsurgery::SurgeryDatum datum{o.p, o.q, o.epsilon, o.delta};
    const auto path = glsurgery::standardize_near_sphere(g0, datum, o.neck);
    glsurgery::AssemblyParams ap;
    ap.grid = o.assembly_grid;
    const glsurgery::CobordismMetric m(g0, path, ap);

    const auto ends = m.fiber(0.0);
    const bool extends = ends.first.same_representation(g0.a) &&
                         ends.second.same_representation(g0.b);
    const auto scan = m.scan();
    const bool pass = path.min_scalar > 0.0 && scan.positive() && extends &&
                      m.product_above_upper();
    json results{{"path", jsonio::isotopy_path_json(path)},
                 {"assembly",
                  {{"total_length", m.total_length()},
                   {"s_lower", m.s_lower()},
                   {"s_upper", m.s_upper()},
                   {"extends_boundary", extends},
                   {"product_above_upper", m.product_above_upper()},
                   {"scan", jsonio::psc_report_json(scan)}}},
                 {"pass", pass}};
    std::ostringstream s;
    s << "neck: (p,q)=(" << o.p << ',' << o.q << ") delta=" << o.delta
      << " stages=" << path.stages() << " path min=" << path.min_scalar
      << " assembly min=" << scan.min_scalar;
    return finish("neck", std::move(config), std::move(results),
                  jsonio::stages_csv(path), o.common, pass, s.str());
  } catch (const Error& e) {
    return fail_report("neck", std::move(config), e, o.common);
  }
}

// ---------------------------------------------------------------------------
// fold: load a fixture, bound the cutoff radius, verify the deformation
// ---------------------------------------------------------------------------

struct FoldOpts {
  CommonOpts common;
  std::string fixture;
  std::string alpha = "auto";
  double box = -1.0;  // < 0 keeps the fixture value
  int grid = 9;
};

int cmd_fold(const FoldOpts& o) {
  apply_common(o.common);
  if (o.grid < 9) throw IoError("--grid must be >= 9 for critical-set seeding");
  const auto fixture =
      jsonio::fold_fixture_from_json(jsonio::read_json_file(o.fixture));
  const double box = o.box < 0.0 ? fixture.box_radius : o.box;
  check_positive(box, "--box");
  double alpha_request = -1.0;  // -1 means the dyadic descent picks it
  if (o.alpha != "auto") {
    try {
      alpha_request = std::stod(o.alpha);
    } catch (const std::exception&) {
      throw IoError("--alpha must be 'auto' or a number");
    }
    if (!(alpha_request > 0.0) || alpha_request > box)
      throw IoError("--alpha must lie in (0, box]");
  }
  json config{{"fixture", o.fixture},
              {"alpha", o.alpha},
              {"box_radius", box},
              {"grid", o.grid},
              {"fold", jsonio::fold_fixture_json(fixture)}};
  try {
    const morsefold::FoldMap fold(fixture.base_dim, fixture.n, fixture.lambda,
                                  fixture.c, fixture.perturbation);
    const double alpha = alpha_request > 0.0
                             ? alpha_request
                             : morsefold::alpha_bound(fold, box);
    const auto result =
        morsefold::verify_deformation(fold, alpha, {}, box, o.grid);
    const auto grad = morsefold::gradient_quadratic_bound(fold, alpha, box);
    const bool pass = result.ok() && grad.ok();
    json results{{"alpha", alpha},
                 {"deformation", jsonio::deformation_json(result)},
                 {"gradient_bound", jsonio::gradient_bound_json(grad)},
                 {"pass", pass}};
    std::ostringstream s;
    s << "fold: n=" << fixture.n << " lambda=" << fixture.lambda
      << " alpha=" << alpha << " flags=" << (result.ok() ? "ok" : "failed");
    return finish("fold", std::move(config), std::move(results),
                  jsonio::deformation_csv(result), o.common, pass, s.str());
  } catch (const Error& e) {
    return fail_report("fold", std::move(config), e, o.common);
  }
}

// ---------------------------------------------------------------------------
// family / sphere-bundle: shared spec loading
// ---------------------------------------------------------------------------

struct FamilyOpts {
  CommonOpts common;
  std::string config_path;
  int p = 1;
  int q = 3;
  int samples = 3;
  double delta_lo = 0.1;
  double delta_hi = 0.1;
  double epsilon = 0.4;
  double tol = 1e-12;
  glsurgery::NeckOptions neck{};
  int assembly_grid = 192;
  double cap_radius = -1.0;  // sphere-bundle only; < 0 matches delta_lo
};

jsonio::FamilySpec load_spec(const FamilyOpts& o, json& config) {
  jsonio::FamilySpec spec;
  if (!o.config_path.empty()) {
    spec = jsonio::family_spec_from_json(jsonio::read_json_file(o.config_path));
    config["source"] = o.config_path;
  } else {
    spec.base = familypipe::make_two_chart_base(o.p, o.q, o.samples,
                                                o.common.seed);
    spec.family = familypipe::make_demo_family(spec.base, o.delta_lo,
                                               o.delta_hi, o.epsilon);
    config["source"] = "demo";
    config["p"] = o.p;
    config["q"] = o.q;
    config["samples_per_chart"] = o.samples;
    config["delta_lo"] = o.delta_lo;
    config["delta_hi"] = o.delta_hi;
    config["epsilon"] = o.epsilon;
    config["seed"] = o.common.seed;
  }
  familypipe::validate(spec.base);  // config-phase: a bad spec exits 2
  return spec;
}

int cmd_family(const FamilyOpts& o) {
  apply_common(o.common);
  check_resolution(o.neck.grid, "--neck-grid");
  check_resolution(o.neck.block_grid, "--block-grid");
  check_resolution(o.assembly_grid, "--grid");
  check_positive(o.tol, "--tol");
  json config{{"tol", o.tol},
              {"stages", o.neck.stages},
              {"neck_grid", o.neck.grid},
              {"block_grid", o.neck.block_grid},
              {"grid", o.assembly_grid}};
  const auto spec = load_spec(o, config);
  try {
    familypipe::FamilyParams params;
    params.neck = o.neck;
    params.assembly.grid = o.assembly_grid;
    params.overlap_tol = o.tol;
    const auto rep = familypipe::run_family(spec.family, spec.base, params);
    std::ostringstream s;
    s << "family: " << rep.samples.size() << " fibers min_scalar="
      << rep.min_scalar << " max overlap residual=" << rep.max_overlap_residual
      << " lipschitz=" << rep.lipschitz_modulus;
    return finish("family", std::move(config),
                  jsonio::family_report_json(rep), jsonio::family_csv(rep),
                  o.common, rep.aggregate_pass, s.str());
  } catch (const Error& e) {
    return fail_report("family", std::move(config), e, o.common);
  }
}

int cmd_sphere_bundle(const FamilyOpts& o) {
  apply_common(o.common);
  check_resolution(o.assembly_grid, "--grid");
  check_positive(o.tol, "--tol");
  json config{{"tol", o.tol}, {"grid", o.assembly_grid}};
  const auto spec = load_spec(o, config);
  const double cap = o.cap_radius > 0.0
                         ? o.cap_radius
                         : glsurgery::plateau_ratio(0.2) *
                               spec.family.samples.at(0).at(0).datum.delta;
  config["cap_radius"] = cap;
  try {
    familypipe::SphereBundleParams params;
    params.grid = o.assembly_grid;
    params.overlap_tol = o.tol;
    const auto rep =
        familypipe::assemble_sphere_bundle(spec.family, spec.base, cap, params);
    std::ostringstream s;
    s << "sphere-bundle: " << rep.fibers.size() << " fibers cap_radius=" << cap
      << " min_scalar=" << rep.min_scalar
      << " max overlap residual=" << rep.max_overlap_residual;
    return finish("sphere-bundle", std::move(config),
                  jsonio::sphere_report_json(rep), jsonio::sphere_csv(rep),
                  o.common, rep.aggregate_pass, s.str());
  } catch (const Error& e) {
    return fail_report("sphere-bundle", std::move(config), e, o.common);
  }
}

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--threads", c.threads,
                  "worker thread cap (0 keeps the default)");
  sub->add_option("--seed", c.seed, "seed for generated frames (default 42)");
  sub->add_option("--out", c.out, "output directory for reports");
  sub->add_option("--timestamp", c.timestamp,
                  "override the report timestamp (for byte comparisons)");
}

void add_family_flags(CLI::App* sub, FamilyOpts& f) {
  add_common(sub, f.common);
  sub->add_option("--config", f.config_path,
                  "family spec JSON (charts, samples, frames, fiber params)");
  sub->add_option("--p", f.p, "sphere dimension p of the surgery sphere");
  sub->add_option("--q", f.q, "sphere dimension q of the normal sphere");
  sub->add_option("--samples", f.samples, "samples per chart (demo spec)");
  sub->add_option("--delta-lo", f.delta_lo, "smallest neck width (demo spec)");
  sub->add_option("--delta-hi", f.delta_hi, "largest neck width (demo spec)");
  sub->add_option("--epsilon", f.epsilon, "handle scale (demo spec)");
  sub->add_option("--tol", f.tol, "overlap residual tolerance");
  sub->add_option("--stages", f.neck.stages, "stage snapshots per fiber");
  sub->add_option("--neck-grid", f.neck.grid, "radial stations per stage scan");
  sub->add_option("--block-grid", f.neck.block_grid, "2D certification grid");
  sub->add_option("--grid", f.assembly_grid, "assembly/fiber scan resolution");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pscforge: construct and certify positive-scalar-curvature metric "
      "families (capped cylinders, surgery necks, cobordisms, fiber bundles)"};
  app.require_subcommand(1);
  int rc = 0;

  TorpedoOpts torpedo;
  auto* t = app.add_subcommand(
      "torpedo", "build a capped-cylinder disk metric and verify it");
  add_common(t, torpedo.common);
  t->add_option("--k", torpedo.k, "disk dimension");
  t->add_option("--delta", torpedo.delta, "cap arc width");
  t->add_option("--eta", torpedo.eta, "blend fraction");
  t->add_option("--grid", torpedo.grid, "scan resolution");
  t->callback([&] { rc = cmd_torpedo(torpedo); });

  CurvatureOpts curv;
  auto* cv = app.add_subcommand(
      "curvature", "closed-form curvature vs the finite-difference oracle");
  add_common(cv, curv.common);
  cv->add_option("--n", curv.n, "sphere dimension");
  cv->add_option("--grid", curv.grid, "exactness scan resolution");
  cv->add_option("--tol", curv.tol, "oracle relative-error tolerance");
  cv->callback([&] { rc = cmd_curvature(curv); });

  NeckOpts neck;
  auto* nk = app.add_subcommand(
      "neck", "standardize a boundary metric near the surgery sphere");
  add_common(nk, neck.common);
  nk->add_option("--p", neck.p, "surgery sphere dimension");
  nk->add_option("--q", neck.q, "normal sphere dimension");
  nk->add_option("--epsilon", neck.epsilon, "handle scale");
  nk->add_option("--delta", neck.delta, "neck width");
  nk->add_option("--stages", neck.neck.stages, "stage snapshots");
  nk->add_option("--neck-grid", neck.neck.grid, "radial stations per stage");
  nk->add_option("--block-grid", neck.neck.block_grid, "2D certification grid");
  nk->add_option("--length", neck.neck.length, "transition block length");
  nk->add_option("--grid", neck.assembly_grid, "assembly scan resolution");
  nk->callback([&] { rc = cmd_neck(neck); });

  FoldOpts fold;
  auto* fd = app.add_subcommand(
      "fold", "verify the local deformation of a perturbed fold fixture");
  add_common(fd, fold.common);
  fd->add_option("--fixture", fold.fixture, "fold fixture JSON")->required();
  fd->add_option("--alpha", fold.alpha, "cutoff radius, or 'auto'");
  fd->add_option("--box", fold.box, "override the fixture box radius");
  fd->add_option("--grid", fold.grid, "critical-set seeding grid (>= 9)");
  fd->callback([&] { rc = cmd_fold(fold); });

  FamilyOpts family;
  auto* fm = app.add_subcommand(
      "family", "build and certify a fiberwise metric family over a base");
  add_family_flags(fm, family);
  fm->callback([&] { rc = cmd_family(family); });

  FamilyOpts bundle;
  auto* sb = app.add_subcommand(
      "sphere-bundle", "assemble mirrored sphere-fiber metrics with caps");
  add_family_flags(sb, bundle);
  sb->add_option("--cap-radius", bundle.cap_radius,
                 "boundary sphere radius (< 0 matches the neck width)");
  sb->callback([&] { rc = cmd_sphere_bundle(bundle); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "config error (" << e.kind() << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
