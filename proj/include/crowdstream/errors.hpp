#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crowdstream {

/// A single failed feasibility check. Violations are data, not errors.
struct Violation {
  std::string constraint;  // "C.1".."C.4", "order", "budget", "integrity"
  int user = -1;
  int index = -1;          // record index or slot index, -1 when not applicable
  std::string detail;
};

struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line(line) {}
  int line;
};

struct FeasibilityError : std::runtime_error {
  FeasibilityError(const std::string& what, std::vector<Violation> v)
      : std::runtime_error(what), violations(std::move(v)) {}
  std::vector<Violation> violations;
};

/// Raised when a solver exhausts its node budget. Carries the best complete
/// solution value seen so far and a valid upper bound on the optimum.
struct ResourceError : std::runtime_error {
  ResourceError(const std::string& what, double incumbent, double bound)
      : std::runtime_error(what), incumbent(incumbent), bound(bound) {}
  double incumbent;
  double bound;
};

}  // namespace crowdstream
