// Fluid relaxation. Time is cut into atoms on which capacity and encounters
// are constant; transfers become divisible flows per atom, receptions become
// divisible content per window (slot), and fluctuation and stall losses are
// dropped. Window buffer balance and the buffer cap are kept.

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdstream/lp.hpp"
#include "crowdstream/offline.hpp"

namespace crowdstream {

RelaxedResult solve_slotted_relaxed(const SlottedInstance& inst) {
  inst.validate();
  const NetworkTrace tr = instance_trace(inst);
  const int N = inst.users();
  const double L = inst.slot_length;
  const double T = tr.horizon;

  std::vector<double> windows;
  for (int s = 0; s <= inst.slots && s * L <= T + kFeasTol; ++s) windows.push_back(std::min(T, s * L));
  if (windows.empty() || windows.back() < T - kFeasTol) windows.push_back(T);
  const int W = static_cast<int>(windows.size()) - 1;

  std::vector<double> points = tr.breakpoints();
  points.insert(points.end(), windows.begin(), windows.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end(),
                           [](double a, double b) { return std::abs(a - b) <= kFeasTol; }),
               points.end());

  LinearProgram lp;
  struct Atom {
    double t1, t2;
    int window;
  };
  std::vector<Atom> atoms;
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    const double mid = 0.5 * (points[i] + points[i + 1]);
    const auto w = std::upper_bound(windows.begin(), windows.end(), mid) - windows.begin() - 1;
    atoms.push_back({points[i], points[i + 1], static_cast<int>(std::clamp<long>(w, 0, W - 1))});
  }

  // flow[m][w] lists (variable) of transfers for owner m inside window w
  std::vector<std::vector<std::vector<int>>> flow(
      static_cast<size_t>(N), std::vector<std::vector<int>>(static_cast<size_t>(std::max(W, 0))));
  for (int n = 0; n < N; ++n) {
    const auto& pn = inst.profiles[static_cast<size_t>(n)];
    for (const auto& a : atoms) {
      const double mid = 0.5 * (a.t1 + a.t2);
      const double h = tr.capacity_at(n, mid);
      if (!(h > 0.0)) continue;
      std::vector<std::pair<int, double>> row;
      for (int m = 0; m < N; ++m) {
        if (inst.budget[static_cast<size_t>(m)] == 0) continue;
        if (m != n && !tr.encounter_holds(n, m, a.t1, a.t2)) continue;
        const double cost = pn.c_data + pn.c_time / h + (m != n ? pn.w_data : 0.0);
        const int v = lp.add_var(-cost);
        flow[static_cast<size_t>(m)][static_cast<size_t>(a.window)].push_back(v);
        row.push_back({v, 1.0});
      }
      if (!row.empty()) lp.add_row(row, h * (a.t2 - a.t1));
    }
  }

  for (int m = 0; m < N; ++m) {
    const auto& p = inst.profiles[static_cast<size_t>(m)];
    if (inst.budget[static_cast<size_t>(m)] == 0) continue;
    std::vector<std::vector<int>> y(static_cast<size_t>(W));
    std::vector<int> B(static_cast<size_t>(W));
    for (int w = 0; w < W; ++w) {
      for (int z = 0; z < p.levels(); ++z) {
        const double r = p.rate(z);
        y[static_cast<size_t>(w)].push_back(lp.add_var(quality_value(p, r) - p.eps_time - p.eps_rate * r));
      }
      B[static_cast<size_t>(w)] = lp.add_var(0.0);
    }
    std::vector<std::pair<int, double>> causal, total;
    for (int w = 0; w < W; ++w) {
      for (int z = 0; z < p.levels(); ++z) {
        causal.push_back({y[static_cast<size_t>(w)][static_cast<size_t>(z)], p.rate(z)});
        total.push_back({y[static_cast<size_t>(w)][static_cast<size_t>(z)], 1.0});
      }
      for (int v : flow[static_cast<size_t>(m)][static_cast<size_t>(w)]) causal.push_back({v, -1.0});
      lp.add_row(causal, 0.0);

      std::vector<std::pair<int, double>> bal;
      if (w > 0) bal.push_back({B[static_cast<size_t>(w) - 1], 1.0});
      bal.push_back({B[static_cast<size_t>(w)], -1.0});
      for (int z = 0; z < p.levels(); ++z) bal.push_back({y[static_cast<size_t>(w)][static_cast<size_t>(z)], 1.0});
      lp.add_row(bal, windows[static_cast<size_t>(w) + 1] - windows[static_cast<size_t>(w)]);
      lp.add_row({{B[static_cast<size_t>(w)], 1.0}}, p.buffer_cap);
    }
    if (!total.empty()) lp.add_row(total, inst.budget[static_cast<size_t>(m)] * p.beta);
  }

  RelaxedResult res;
  res.stats.lp_rows = static_cast<int>(lp.rows.size());
  res.stats.lp_cols = lp.num_vars;
  if (lp.num_vars == 0) return res;
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw ResourceError("relaxation did not reach optimality", 0.0,
                        std::numeric_limits<double>::infinity());
  res.bound = std::max(0.0, sol.objective);
  res.stats.lp_iterations = sol.iterations;
  return res;
}

}  // namespace crowdstream
