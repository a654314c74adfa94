#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "crowdstream/lp.hpp"

using namespace crowdstream;

namespace {

// Solves the square system M y = r by Gauss-Jordan; false when singular.
bool solve_square(std::vector<std::vector<double>> M, std::vector<double> r, std::vector<double>& y) {
  const size_t n = r.size();
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    for (size_t i = c + 1; i < n; ++i)
      if (std::abs(M[i][c]) > std::abs(M[p][c])) p = i;
    if (std::abs(M[p][c]) < 1e-12) return false;
    std::swap(M[p], M[c]);
    std::swap(r[p], r[c]);
    for (size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const double f = M[i][c] / M[c][c];
      for (size_t k = c; k < n; ++k) M[i][k] -= f * M[c][k];
      r[i] -= f * r[c];
    }
  }
  y.resize(n);
  for (size_t i = 0; i < n; ++i) y[i] = r[i] / M[i][i];
  return true;
}

// Best objective over all basic feasible points of a bounded LP.
double vertex_oracle(const LinearProgram& lp) {
  const int n = lp.num_vars;
  std::vector<std::vector<double>> A = lp.rows;
  std::vector<double> b = lp.rhs;
  for (int j = 0; j < n; ++j) {
    std::vector<double> row(static_cast<size_t>(n), 0.0);
    row[static_cast<size_t>(j)] = -1.0;
    A.push_back(row);
    b.push_back(0.0);
  }
  const size_t m = A.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<size_t> pick(static_cast<size_t>(n));
  for (size_t mask = 0; mask < (size_t{1} << m); ++mask) {
    if (static_cast<int>(__builtin_popcountll(mask)) != n) continue;
    std::vector<std::vector<double>> M;
    std::vector<double> r;
    for (size_t i = 0; i < m; ++i)
      if (mask >> i & 1) {
        M.push_back(A[i]);
        r.push_back(b[i]);
      }
    std::vector<double> x;
    if (!solve_square(M, r, x)) continue;
    bool ok = true;
    for (size_t i = 0; i < m && ok; ++i) {
      double s = 0;
      for (int j = 0; j < n; ++j) s += A[i][static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      ok = s <= b[i] + 1e-9;
    }
    if (!ok) continue;
    double v = 0;
    for (int j = 0; j < n; ++j) v += lp.objective[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("textbook lp") {
  LinearProgram lp;
  const int x = lp.add_var(3), y = lp.add_var(5);
  lp.add_row({{x, 1}}, 4);
  lp.add_row({{y, 2}}, 12);
  lp.add_row({{x, 3}, {y, 2}}, 18);
  const auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(36));
  CHECK(r.x[0] == doctest::Approx(2));
  CHECK(r.x[1] == doctest::Approx(6));
}

TEST_CASE("unbounded and trivial lps") {
  LinearProgram lp;
  const int x = lp.add_var(1);
  lp.add_var(1);
  lp.add_row({{x, 1}}, 1);
  CHECK(solve_lp(lp).status == LpStatus::kUnbounded);

  LinearProgram neg;
  const int a = neg.add_var(-1);
  neg.add_row({{a, 1}}, 5);
  const auto r = solve_lp(neg);
  CHECK(r.status == LpStatus::kOptimal);
  CHECK(r.objective == 0.0);
}

TEST_CASE("degenerate lp terminates") {
  LinearProgram lp;
  const int x = lp.add_var(10), y = lp.add_var(-57), z = lp.add_var(-9), w = lp.add_var(-24);
  lp.add_row({{x, 0.5}, {y, -5.5}, {z, -2.5}, {w, 9}}, 0);
  lp.add_row({{x, 0.5}, {y, -1.5}, {z, -0.5}, {w, 1}}, 0);
  lp.add_row({{x, 1}}, 1);
  const auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(1));
}

TEST_CASE("random bounded lps match vertex enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 3.0), cost(-1.0, 2.0), rhs(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp;
    const int n = 2 + trial % 2;
    for (int j = 0; j < n; ++j) lp.add_var(cost(rng));
    for (int j = 0; j < n; ++j) lp.add_row({{j, 1.0}}, 4.0);
    const int m = 1 + trial % 4;
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < n; ++j) row.emplace_back(j, std::round(coef(rng) * 4) / 4);
      lp.add_row(row, trial % 5 == 0 ? 0.0 : rhs(rng));
    }
    const auto r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(vertex_oracle(lp)).epsilon(1e-9));
  }
}
