#pragma once

// Dense primal simplex for   maximize c.x  s.t.  A x <= b,  x >= 0,  b >= 0.
// With b >= 0 the slack basis is feasible, so a single phase suffices.

#include <vector>

namespace crowdstream {

struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;            // size num_vars
  std::vector<std::vector<double>> rows;    // each of size num_vars
  std::vector<double> rhs;                  // >= 0

  int add_var(double cost) {
    objective.push_back(cost);
    for (auto& r : rows) r.push_back(0.0);
    return num_vars++;
  }
  /// Returns the row index; `coeffs` pairs are (variable, coefficient).
  int add_row(const std::vector<std::pair<int, double>>& coeffs, double bound);
};

enum class LpStatus { kOptimal, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kOptimal;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
};

LpResult solve_lp(const LinearProgram& lp, long max_iterations = 1'000'000);

}  // namespace crowdstream
