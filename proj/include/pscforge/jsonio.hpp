#pragma once

#include <json.hpp>
#include <string>

#include "pscforge/familypipe.hpp"
#include "pscforge/glsurgery.hpp"
#include "pscforge/morsefold.hpp"

namespace pscforge::jsonio {

// Ordered so that report bytes depend only on the values, never on hashing.
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

// Both raise IoError with the offending path in the message.
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Report serializers
// ---------------------------------------------------------------------------

json profile_json(const smoothfn::SmoothProfile& p);
json psc_report_json(const curvature::PscReport& r);
json torpedo_check_json(const glsurgery::TorpedoCheck& c);
json scaling_rows_json(const std::vector<std::array<double, 4>>& rows);
json isotopy_path_json(const glsurgery::IsotopyPath& path);
json deformation_json(const morsefold::DeformationResult& r);
json gradient_bound_json(const morsefold::GradientBound& b);
json family_report_json(const familypipe::FamilyMetricReport& r);
json sphere_report_json(const familypipe::SphereBundleReport& r);

// ---------------------------------------------------------------------------
// Report envelope
// ---------------------------------------------------------------------------

// {"schema": "pscforge/1", "tool": ..., "generated_at": ..., "config": ...,
//  "results": ...}. An empty timestamp selects the current UTC time; the
// field always lands on its own line of the dump, so byte comparisons can
// strip it.
json envelope(const std::string& tool, json config, json results,
              const std::string& timestamp = "");

// Indented dump with a trailing newline.
std::string dump_report(const json& report);

// The dump with the generated_at line removed, for byte comparisons.
std::string strip_timestamp(const std::string& dumped);

// ---------------------------------------------------------------------------
// Fixture and config parsers (malformed input raises IoError)
// ---------------------------------------------------------------------------

morsefold::Perturbation perturbation_from_json(const json& j);
json perturbation_json(const morsefold::Perturbation& p);

struct FoldFixture {
  int base_dim = 1;
  int n = 2;
  int lambda = 1;
  double c = 0.0;
  double box_radius = 0.5;
  morsefold::Perturbation perturbation;
};

FoldFixture fold_fixture_from_json(const json& j);
json fold_fixture_json(const FoldFixture& f);

// A family over a sampled base: charts, overlap frames, and per-sample fold
// and surgery parameters. The boundary metric of every sample is the round
// fixture implied by (p, q).
struct FamilySpec {
  familypipe::BaseSampleSet base;
  familypipe::FiberFamily family;
};

FamilySpec family_spec_from_json(const json& j);
json family_spec_json(const familypipe::BaseSampleSet& base,
                      const familypipe::FiberFamily& family);

// ---------------------------------------------------------------------------
// CSV exports (numbers in shortest round-trip form; LF line endings)
// ---------------------------------------------------------------------------

std::string csv_number(double v);
std::string scan_csv(const std::vector<std::array<double, 3>>& rows,
                     int radial_dims);
std::string family_csv(const familypipe::FamilyMetricReport& r);
std::string sphere_csv(const familypipe::SphereBundleReport& r);
std::string stages_csv(const glsurgery::IsotopyPath& path);
std::string deformation_csv(const morsefold::DeformationResult& r);

}  // namespace pscforge::jsonio
