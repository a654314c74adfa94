#include "crowdstream/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdstream {

int LinearProgram::add_row(const std::vector<std::pair<int, double>>& coeffs, double bound) {
  if (bound < 0.0) throw std::invalid_argument("LinearProgram: negative right-hand side");
  std::vector<double> row(static_cast<size_t>(num_vars), 0.0);
  for (const auto& [j, a] : coeffs) {
    if (j < 0 || j >= num_vars) throw std::out_of_range("LinearProgram: bad variable index");
    row[static_cast<size_t>(j)] += a;
  }
  rows.push_back(std::move(row));
  rhs.push_back(bound);
  return static_cast<int>(rows.size()) - 1;
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-12;

}  // namespace

LpResult solve_lp(const LinearProgram& lp, long max_iterations) {
  const size_t m = lp.rows.size();
  const size_t n = static_cast<size_t>(lp.num_vars);
  const size_t cols = n + m + 1;  // structural, slack, rhs
  // Row 0..m-1 constraints, row m reduced costs (stored as -c).
  std::vector<double> t((m + 1) * cols, 0.0);
  auto at = [&](size_t i, size_t j) -> double& { return t[i * cols + j]; };
  std::vector<size_t> basis(m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) at(i, j) = lp.rows[i][j];
    at(i, n + i) = 1.0;
    at(i, cols - 1) = lp.rhs[i];
    basis[i] = n + i;
  }
  for (size_t j = 0; j < n; ++j) at(m, j) = -lp.objective[j];

  LpResult res;
  long degenerate_run = 0;
  std::vector<size_t> nz;
  while (true) {
    if (res.iterations >= max_iterations) {
      res.status = LpStatus::kIterationLimit;
      break;
    }
    const bool bland = degenerate_run > 50;
    size_t enter = cols;
    double best = -kCostTol;
    for (size_t j = 0; j + 1 < cols; ++j) {
      const double d = at(m, j);
      if (d < best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter == cols) break;

    size_t leave = m;
    double ratio = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a > kPivotTol) {
        const double r = at(i, cols - 1) / a;
        if (r < ratio - 1e-15 || (r <= ratio + 1e-15 && leave < m && basis[i] < basis[leave])) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave == m) {
      res.status = LpStatus::kUnbounded;
      break;
    }
    degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;

    const double piv = at(leave, enter);
    nz.clear();
    for (size_t j = 0; j < cols; ++j) {
      at(leave, j) /= piv;
      if (at(leave, j) != 0.0) nz.push_back(j);
    }
    at(leave, enter) = 1.0;
    for (size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = at(i, enter);
      if (f == 0.0) continue;
      for (size_t j : nz) at(i, j) -= f * at(leave, j);
      at(i, enter) = 0.0;
      if (i < m && at(i, cols - 1) < 0.0 && at(i, cols - 1) > -1e-12) at(i, cols - 1) = 0.0;
    }
    basis[leave] = enter;
    ++res.iterations;
  }

  res.x.assign(n, 0.0);
  for (size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = at(i, cols - 1);
  res.objective = 0.0;
  for (size_t j = 0; j < n; ++j) res.objective += lp.objective[j] * res.x[j];
  return res;
}

}  // namespace crowdstream
