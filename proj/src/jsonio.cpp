#include "pscforge/jsonio.hpp"

#include <Eigen/Dense>
#include <ctime>
#include <fstream>
#include <sstream>

#include "pscforge/errors.hpp"

namespace pscforge::jsonio {

namespace {

std::string closure_name(smoothfn::Closure c) {
  return c == smoothfn::Closure::Disk ? "disk" : "cylinder";
}

json argmin_json(const std::array<double, 2>& argmin, int dims) {
  json a = json::array();
  for (int i = 0; i < dims; ++i) a.push_back(argmin[static_cast<std::size_t>(i)]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Shared guards for config parsing: every structural defect surfaces as an
// IoError naming the key, so the CLI can map it to the config exit code.
const json& require(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw IoError(std::string(where) + ": missing key '" + key + "'");
  return j.at(key);
}

double number_at(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_number())
    throw IoError(std::string(where) + ": '" + key + "' must be a number");
  return v.get<double>();
}

int int_at(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer())
    throw IoError(std::string(where) + ": '" + key + "' must be an integer");
  return v.get<int>();
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw IoError(std::string(where) + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).is_array() ? j.at(0).size() : 0;
  if (cols == 0)
    throw IoError(std::string(where) + ": rows must be non-empty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || row.size() != cols)
      throw IoError(std::string(where) + ": ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row.at(k).is_number())
        throw IoError(std::string(where) + ": matrix entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          row.at(k).get<double>();
    }
  }
  return m;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Report serializers
// ---------------------------------------------------------------------------

json profile_json(const smoothfn::SmoothProfile& p) {
  json pieces = json::array();
  for (const auto& pc : p.pieces()) {
    json sines = json::array();
    for (const auto& s : pc.sines)
      sines.push_back({{"amplitude", s.amplitude},
                       {"delta", s.delta},
                       {"phase", s.phase}});
    json polys = json::array();
    for (const auto& q : pc.polys)
      polys.push_back({{"anchor", q.anchor}, {"coeffs", q.coeffs}});
    pieces.push_back({{"t0", pc.t0},
                      {"t1", pc.t1},
                      {"sines", std::move(sines)},
                      {"polys", std::move(polys)}});
  }
  return {{"left", closure_name(p.closure())},
          {"right", closure_name(p.right_closure())},
          {"length", p.domain_length()},
          {"pieces", std::move(pieces)}};
}

json psc_report_json(const curvature::PscReport& r) {
  json regions = json::array();
  for (const auto& s : r.regions) {
    regions.push_back({{"name", s.name},
                       {"min_scalar", s.min_scalar},
                       {"argmin", argmin_json(s.argmin, r.argmin_dims)},
                       {"nonpositive", s.nonpositive},
                       {"count", s.count}});
  }
  return {{"min_scalar", r.min_scalar},
          {"argmin", argmin_json(r.argmin, r.argmin_dims)},
          {"nonpositive_count", r.nonpositive_count},
          {"sample_count", r.sample_count},
          {"grid", {{"samples", r.grid.samples}, {"radial_dims", r.grid.radial_dims}}},
          {"positive", r.positive()},
          {"regions", std::move(regions)}};
}

json torpedo_check_json(const glsurgery::TorpedoCheck& c) {
  return {{"sine_cap", c.sine_cap},
          {"plateau", c.plateau},
          {"junctions_smooth", c.junctions_smooth},
          {"concave", c.concave},
          {"positive", c.positive},
          {"degenerate", c.degenerate},
          {"cap_delta", c.cap_delta},
          {"plateau_value", c.plateau_value},
          {"ok", c.ok()},
          {"scan", psc_report_json(c.scan)}};
}

json scaling_rows_json(const std::vector<std::array<double, 4>>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"delta", r[0]},
                   {"plateau", r[1]},
                   {"min_scalar", r[2]},
                   {"min_scalar_times_plateau_sq", r[3]}});
  return out;
}

json isotopy_path_json(const glsurgery::IsotopyPath& path) {
  json stage_minima = json::array();
  for (const auto& rep : path.stage_reports) stage_minima.push_back(rep.min_scalar);
  return {{"stages", path.stages()},
          {"stage_times", path.stage_times},
          {"stage_weights", path.stage_weights},
          {"stage_minima", std::move(stage_minima)},
          {"neck_start", path.neck_start},
          {"target_residual", path.target_residual},
          {"min_scalar", path.min_scalar},
          {"block", psc_report_json(path.block_report)}};
}

json deformation_json(const morsefold::DeformationResult& r) {
  json per_t = json::array();
  for (std::size_t i = 0; i < r.t_samples.size(); ++i) {
    json entry{{"t", r.t_samples[i]}};
    if (i < r.critical_sets.size()) {
      const auto& cs = r.critical_sets[i];
      entry["critical_count"] = cs.points.size();
      if (!cs.points.empty()) entry["first_point"] = cs.points.front();
    }
    per_t.push_back(std::move(entry));
  }
  return {{"alpha", r.alpha},
          {"per_t", std::move(per_t)},
          {"dropped_seeds", r.dropped_seeds},
          {"critical_set_preserved", r.critical_set_preserved},
          {"outside_unchanged", r.outside_unchanged},
          {"standard_near_fold", r.standard_near_fold},
          {"hessian_match", r.hessian_match},
          {"ok", r.ok()}};
}

json gradient_bound_json(const morsefold::GradientBound& b) {
  return {{"measured", b.measured}, {"ceiling", b.ceiling}, {"ok", b.ok()}};
}

json family_report_json(const familypipe::FamilyMetricReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"chart", s.id.chart},
                       {"sample", s.id.sample},
                       {"parameter", s.parameter},
                       {"extends_boundary", s.extends_boundary},
                       {"product_near_boundaries", s.product_near_boundaries},
                       {"psc", s.psc},
                       {"pass", s.pass()},
                       {"scan", psc_report_json(s.scan)}});
  }
  json overlaps = json::array();
  for (const auto& o : r.overlaps)
    overlaps.push_back({{"overlap", o.overlap}, {"residual", o.residual}});
  json continuity = json::array();
  for (const auto& c : r.continuity) {
    continuity.push_back(
        {{"left", {{"chart", c.left.chart}, {"sample", c.left.sample}}},
         {"right", {{"chart", c.right.chart}, {"sample", c.right.sample}}},
         {"dz", c.dz},
         {"difference", c.difference},
         {"modulus", c.modulus}});
  }
  return {{"samples", std::move(samples)},
          {"overlaps", std::move(overlaps)},
          {"continuity", std::move(continuity)},
          {"overlap_tol", r.overlap_tol},
          {"max_overlap_residual", r.max_overlap_residual},
          {"lipschitz_modulus", r.lipschitz_modulus},
          {"min_scalar", r.min_scalar},
          {"aggregate_pass", r.aggregate_pass}};
}

json sphere_report_json(const familypipe::SphereBundleReport& r) {
  json fibers = json::array();
  for (const auto& f : r.fibers) {
    fibers.push_back({{"chart", f.id.chart},
                      {"sample", f.id.sample},
                      {"parameter", f.parameter},
                      {"mirror_exact", f.mirror_exact},
                      {"cap_mismatch", f.cap_mismatch},
                      {"psc", f.psc},
                      {"pass", f.pass()},
                      {"scan", psc_report_json(f.scan)}});
  }
  json overlaps = json::array();
  for (const auto& o : r.overlaps)
    overlaps.push_back({{"overlap", o.overlap}, {"residual", o.residual}});
  return {{"cap_radius", r.cap_radius},
          {"fibers", std::move(fibers)},
          {"overlaps", std::move(overlaps)},
          {"overlap_tol", r.overlap_tol},
          {"max_overlap_residual", r.max_overlap_residual},
          {"min_scalar", r.min_scalar},
          {"aggregate_pass", r.aggregate_pass}};
}

// ---------------------------------------------------------------------------
// Envelope
// ---------------------------------------------------------------------------

json envelope(const std::string& tool, json config, json results,
              const std::string& timestamp) {
  json e;
  e["schema"] = "pscforge/1";
  e["tool"] = tool;
  e["generated_at"] = timestamp.empty() ? utc_now() : timestamp;
  e["config"] = std::move(config);
  e["results"] = std::move(results);
  return e;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

std::string strip_timestamp(const std::string& dumped) {
  std::istringstream in(dumped);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"generated_at\":") != std::string::npos) continue;
    out << line << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Fixture and config parsers
// ---------------------------------------------------------------------------

morsefold::Perturbation perturbation_from_json(const json& j) {
  const char* where = "perturbation";
  morsefold::Perturbation p;
  const json& terms = require(j, "terms", where);
  if (!terms.is_array()) throw IoError("perturbation: 'terms' must be an array");
  for (const json& t : terms) {
    if (t.contains("kind") && t.at("kind") != "monomial")
      throw IoError("perturbation: unknown term kind '" +
                    t.at("kind").dump() + "'");
    const json& exps = require(t, "exponents", where);
    if (!exps.is_array())
      throw IoError("perturbation: 'exponents' must be an array");
    morsefold::MonomialTerm term;
    for (const json& e : exps) {
      if (!e.is_number_integer())
        throw IoError("perturbation: exponents must be integers");
      term.exponents.push_back(e.get<int>());
    }
    term.coefficient = number_at(t, "coefficient", where);
    p.terms.push_back(std::move(term));
  }
  if (j.contains("declared_cubic")) {
    if (!j.at("declared_cubic").is_boolean())
      throw IoError("perturbation: 'declared_cubic' must be a boolean");
    p.declared_cubic = j.at("declared_cubic").get<bool>();
  }
  if (j.contains("cubic_constant"))
    p.cubic_constant = number_at(j, "cubic_constant", where);
  return p;
}

json perturbation_json(const morsefold::Perturbation& p) {
  json terms = json::array();
  for (const auto& t : p.terms)
    terms.push_back({{"kind", "monomial"},
                     {"exponents", t.exponents},
                     {"coefficient", t.coefficient}});
  return {{"terms", std::move(terms)},
          {"declared_cubic", p.declared_cubic},
          {"cubic_constant", p.cubic_constant}};
}

FoldFixture fold_fixture_from_json(const json& j) {
  const char* where = "fold fixture";
  FoldFixture f;
  const json& fold = require(j, "fold", where);
  f.base_dim = int_at(fold, "base_dim", where);
  f.n = int_at(fold, "n", where);
  f.lambda = int_at(fold, "lambda", where);
  f.c = number_at(fold, "c", where);
  if (j.contains("box_radius")) f.box_radius = number_at(j, "box_radius", where);
  if (j.contains("perturbation"))
    f.perturbation = perturbation_from_json(j.at("perturbation"));
  return f;
}

json fold_fixture_json(const FoldFixture& f) {
  return {{"fold",
           {{"base_dim", f.base_dim},
            {"n", f.n},
            {"lambda", f.lambda},
            {"c", f.c}}},
          {"box_radius", f.box_radius},
          {"perturbation", perturbation_json(f.perturbation)}};
}

FamilySpec family_spec_from_json(const json& j) {
  const char* where = "family spec";
  FamilySpec spec;
  spec.base.p = int_at(j, "p", where);
  spec.base.q = int_at(j, "q", where);

  const json& charts = require(j, "charts", where);
  if (!charts.is_array() || charts.empty())
    throw IoError("family spec: 'charts' must be a non-empty array");
  for (const json& c : charts) {
    familypipe::ChartBox box;
    const json& name = require(c, "name", where);
    if (!name.is_string())
      throw IoError("family spec: chart 'name' must be a string");
    box.name = name.get<std::string>();
    box.lo = number_at(c, "lo", where);
    box.hi = number_at(c, "hi", where);
    const json& samples = require(c, "samples", where);
    if (!samples.is_array())
      throw IoError("family spec: chart 'samples' must be an array");
    for (const json& s : samples) {
      if (!s.is_number())
        throw IoError("family spec: chart samples must be numbers");
      box.samples.push_back(s.get<double>());
    }
    spec.base.charts.push_back(std::move(box));
  }

  if (j.contains("overlaps")) {
    const json& overlaps = j.at("overlaps");
    if (!overlaps.is_array())
      throw IoError("family spec: 'overlaps' must be an array");
    for (const json& o : overlaps) {
      familypipe::OverlapSample ov;
      ov.chart_a = static_cast<std::size_t>(int_at(o, "chart_a", where));
      ov.sample_a = static_cast<std::size_t>(int_at(o, "sample_a", where));
      ov.chart_b = static_cast<std::size_t>(int_at(o, "chart_b", where));
      ov.sample_b = static_cast<std::size_t>(int_at(o, "sample_b", where));
      ov.frame = matrix_from_json(require(o, "frame", where), where);
      spec.base.overlaps.push_back(std::move(ov));
    }
  }

  const json& fibers = require(j, "fibers", where);
  if (!fibers.is_array() || fibers.size() != spec.base.charts.size())
    throw IoError("family spec: 'fibers' must hold one row per chart");
  for (std::size_t ci = 0; ci < fibers.size(); ++ci) {
    const json& row = fibers.at(ci);
    if (!row.is_array() || row.size() != spec.base.charts[ci].samples.size())
      throw IoError("family spec: fiber row size must match the chart samples");
    std::vector<familypipe::FiberSample> out_row;
    for (const json& fs : row) {
      const json& fold = require(fs, "fold", where);
      const int n = int_at(fold, "n", where);
      const int lambda = int_at(fold, "lambda", where);
      const int base_dim = int_at(fold, "base_dim", where);
      const double c = number_at(fold, "c", where);
      morsefold::Perturbation pert;
      if (fold.contains("perturbation"))
        pert = perturbation_from_json(fold.at("perturbation"));

      const json& datum = require(fs, "datum", where);
      glsurgery::SurgeryDatum d;
      d.p = int_at(datum, "p", where);
      d.q = int_at(datum, "q", where);
      d.epsilon = number_at(datum, "epsilon", where);
      d.delta = number_at(datum, "delta", where);

      familypipe::FiberSample sample{
          morsefold::FoldMap(base_dim, n, lambda, c, std::move(pert)),
          familypipe::round_sphere_boundary(spec.base.p, spec.base.q), d,
          Eigen::MatrixXd()};
      if (fs.contains("background"))
        sample.background = matrix_from_json(fs.at("background"), where);
      out_row.push_back(std::move(sample));
    }
    spec.family.samples.push_back(std::move(out_row));
  }
  return spec;
}

json family_spec_json(const familypipe::BaseSampleSet& base,
                      const familypipe::FiberFamily& family) {
  json charts = json::array();
  for (const auto& c : base.charts)
    charts.push_back({{"name", c.name},
                      {"lo", c.lo},
                      {"hi", c.hi},
                      {"samples", c.samples}});
  json overlaps = json::array();
  for (const auto& o : base.overlaps)
    overlaps.push_back({{"chart_a", o.chart_a},
                        {"sample_a", o.sample_a},
                        {"chart_b", o.chart_b},
                        {"sample_b", o.sample_b},
                        {"frame", matrix_json(o.frame)}});
  json fibers = json::array();
  for (const auto& row : family.samples) {
    json jrow = json::array();
    for (const auto& fs : row) {
      json entry{{"fold",
                  {{"base_dim", fs.fold.base_dim()},
                   {"n", fs.fold.n()},
                   {"lambda", fs.fold.index()},
                   {"c", fs.fold.critical_value()}}},
                 {"datum",
                  {{"p", fs.datum.p},
                   {"q", fs.datum.q},
                   {"epsilon", fs.datum.epsilon},
                   {"delta", fs.datum.delta}}}};
      if (!fs.fold.perturbation().empty())
        entry["fold"]["perturbation"] =
            perturbation_json(fs.fold.perturbation());
      if (fs.background.size() > 0)
        entry["background"] = matrix_json(fs.background);
      jrow.push_back(std::move(entry));
    }
    fibers.push_back(std::move(jrow));
  }
  return {{"p", base.p},
          {"q", base.q},
          {"charts", std::move(charts)},
          {"overlaps", std::move(overlaps)},
          {"fibers", std::move(fibers)}};
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

std::string csv_number(double v) { return json(v).dump(); }

std::string scan_csv(const std::vector<std::array<double, 3>>& rows,
                     int radial_dims) {
  std::ostringstream out;
  out << (radial_dims == 2 ? "t1,t2,scalar\n" : "t,scalar\n");
  for (const auto& r : rows) {
    if (radial_dims == 2)
      out << csv_number(r[0]) << ',' << csv_number(r[1]) << ','
          << csv_number(r[2]) << '\n';
    else
      out << csv_number(r[0]) << ',' << csv_number(r[1]) << '\n';
  }
  return out.str();
}

std::string family_csv(const familypipe::FamilyMetricReport& r) {
  std::ostringstream out;
  out << "kind,chart,sample,parameter,min_scalar,residual,pass\n";
  for (const auto& s : r.samples) {
    out << "sample," << s.id.chart << ',' << s.id.sample << ','
        << csv_number(s.parameter) << ',' << csv_number(s.scan.min_scalar)
        << ",," << (s.pass() ? 1 : 0) << '\n';
  }
  for (const auto& o : r.overlaps) {
    out << "overlap," << o.overlap << ",,,," << csv_number(o.residual) << ','
        << (o.residual <= r.overlap_tol ? 1 : 0) << '\n';
  }
  for (const auto& c : r.continuity) {
    out << "continuity," << c.left.chart << ',' << c.left.sample << ",,,"
        << csv_number(c.modulus) << ",1\n";
  }
  return out.str();
}

std::string sphere_csv(const familypipe::SphereBundleReport& r) {
  std::ostringstream out;
  out << "kind,chart,sample,parameter,min_scalar,residual,pass\n";
  for (const auto& f : r.fibers) {
    out << "fiber," << f.id.chart << ',' << f.id.sample << ','
        << csv_number(f.parameter) << ',' << csv_number(f.scan.min_scalar)
        << ',' << csv_number(f.cap_mismatch) << ',' << (f.pass() ? 1 : 0)
        << '\n';
  }
  for (const auto& o : r.overlaps) {
    out << "overlap," << o.overlap << ",,,," << csv_number(o.residual) << ','
        << (o.residual <= r.overlap_tol ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string stages_csv(const glsurgery::IsotopyPath& path) {
  std::ostringstream out;
  out << "stage,time,weight,min_scalar\n";
  for (int s = 0; s < path.stages(); ++s) {
    const auto i = static_cast<std::size_t>(s);
    out << s << ',' << csv_number(path.stage_times[i]) << ','
        << csv_number(path.stage_weights[i]) << ','
        << csv_number(path.stage_reports[i].min_scalar) << '\n';
  }
  return out.str();
}

std::string deformation_csv(const morsefold::DeformationResult& r) {
  std::ostringstream out;
  out << "t,critical_count\n";
  for (std::size_t i = 0; i < r.t_samples.size(); ++i) {
    out << csv_number(r.t_samples[i]) << ','
        << (i < r.critical_sets.size() ? r.critical_sets[i].points.size() : 0)
        << '\n';
  }
  return out.str();
}

}  // namespace pscforge::jsonio
