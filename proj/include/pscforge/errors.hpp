#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pscforge {

// Typed failure with a stable kind() tag for machine-readable reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("DomainError", w) {}
};

struct IncompatibilityError : Error {
  explicit IncompatibilityError(const std::string& w)
      : Error("IncompatibilityError", w) {}
};

struct ConstructionError : Error {
  explicit ConstructionError(const std::string& w)
      : Error("ConstructionError", w) {}
};

struct AdmissibilityError : Error {
  explicit AdmissibilityError(const std::string& w)
      : Error("AdmissibilityError", w) {}
};

struct DegenerateMetricError : Error {
  explicit DegenerateMetricError(const std::string& w)
      : Error("DegenerateMetricError", w) {}
};

struct GluingError : Error {
  explicit GluingError(const std::string& w) : Error("GluingError", w) {}
};

// The profile-space feasibility search ran out of candidates. Usually the
// requested neck is too wide for the domain or the stage budget is too small.
struct NeckInfeasible : Error {
  explicit NeckInfeasible(const std::string& w) : Error("NeckInfeasible", w) {}
};

// The dyadic cutoff-radius descent exhausted its budget; the perturbation is
// not cubic-dominated on the box.
struct NoValidAlpha : Error {
  explicit NoValidAlpha(const std::string& w) : Error("NoValidAlpha", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("IoError", w) {}
};

}  // namespace pscforge
