// Exact optimum of the slotted problem by memoized search over slots. The
// per-slot decision is split into a static part (which downloader fetches
// what, cheapest way to deliver a given per-owner level mix) and a dynamic
// part (budgets, buffers, stall and degradation bookkeeping).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <unordered_map>

#include "crowdstream/offline.hpp"

namespace crowdstream {

namespace {

constexpr double kTieTol = 1e-12;

struct OwnerState {
  double q = 0.0;
  int last = -1;  // level of the highest segment in the last nonempty slot
  double pending = 0.0;
  int used = 0;
};

/// A slot action: the combined kappa and what it delivers.
struct Aggregate {
  std::vector<int> kappa;   // [n][m][z]
  std::vector<int> counts;  // [m][z]
  double energy = 0.0;
};

struct BudgetExhausted {};

class ExactSearch {
 public:
  ExactSearch(const SlottedInstance& inst, std::uint64_t budget)
      : inst_(inst), N_(inst.users()), Z_(SlottedSchedule::zeros(inst).levels()), budget_(budget) {
    for (int s = 0; s < inst.slots; ++s) actions_.push_back(build_slot(s));
  }

  double run() {
    std::vector<OwnerState> root(static_cast<size_t>(N_));
    return solve(0, root);
  }

  SlottedSchedule reconstruct() const {
    SlottedSchedule k(inst_.slots, N_, Z_);
    std::vector<OwnerState> st(static_cast<size_t>(N_));
    for (int s = 0; s < inst_.slots; ++s) {
      const auto it = memo_.find(key(s, st));
      if (it == memo_.end() || it->second.choice < 0) break;
      const auto& a = actions_[static_cast<size_t>(s)][static_cast<size_t>(it->second.choice)];
      for (int n = 0; n < N_; ++n)
        for (int m = 0; m < N_; ++m)
          for (int z = 0; z < Z_; ++z) k.at(s, n, m, z) = a.kappa[kidx(n, m, z)];
      double reward = 0.0;
      transition(s, st, a, reward);
    }
    return k;
  }

  SolverStats stats() const {
    SolverStats st;
    st.nodes = nodes_;
    st.states = memo_.size();
    return st;
  }

  double incumbent() const { return incumbent_; }

 private:
  struct Entry {
    double value = 0.0;
    int choice = -1;
  };

  size_t kidx(int n, int m, int z) const {
    return (static_cast<size_t>(n) * N_ + m) * Z_ + z;
  }

  /// Every kappa_n that fits one downloader's slot capacity, in lexicographic order.
  void enumerate_downloader(int s, int n, std::vector<std::vector<int>>& out) const {
    const double H = inst_.capacity[static_cast<size_t>(n)][static_cast<size_t>(s)];
    std::vector<int> cur(static_cast<size_t>(N_) * Z_, 0);
    std::vector<std::pair<int, int>> slots;  // (m, z) usable by n in slot s
    for (int m = 0; m < N_; ++m) {
      if (inst_.budget[static_cast<size_t>(m)] == 0 || !inst_.encountered(n, m, s)) continue;
      for (int z = 0; z < inst_.profiles[static_cast<size_t>(m)].levels(); ++z) slots.push_back({m, z});
    }
    auto rec = [&](auto&& self, size_t i, double left) -> void {
      if (i == slots.size()) {
        out.push_back(cur);
        return;
      }
      const auto [m, z] = slots[i];
      const double v = inst_.profiles[static_cast<size_t>(m)].segment_volume(z);
      const int cap = inst_.budget[static_cast<size_t>(m)];
      const size_t at = static_cast<size_t>(m) * Z_ + z;
      for (int c = 0; c <= cap && c * v <= left + kFeasTol; ++c) {
        cur[at] = c;
        self(self, i + 1, left - c * v);
      }
      cur[at] = 0;
    };
    rec(rec, 0, H);
  }

  double downloader_energy(int s, int n, const std::vector<int>& kn) const {
    const auto& pn = inst_.profiles[static_cast<size_t>(n)];
    double x = 0.0, wifi = 0.0;
    for (int m = 0; m < N_; ++m) {
      const auto& pm = inst_.profiles[static_cast<size_t>(m)];
      for (int z = 0; z < pm.levels(); ++z) {
        const double v = kn[static_cast<size_t>(m) * Z_ + z] * pm.segment_volume(z);
        x += v;
        if (m != n) wifi += v;
      }
    }
    if (x <= 0.0) return 0.0;
    const double H = inst_.capacity[static_cast<size_t>(n)][static_cast<size_t>(s)];
    return pn.c_time * (x / H) * inst_.slot_length + pn.c_data * x + pn.w_data * wifi;
  }

  std::vector<Aggregate> build_slot(int s) const {
    std::vector<std::vector<std::vector<int>>> per(static_cast<size_t>(N_));
    std::vector<std::vector<double>> energy(static_cast<size_t>(N_));
    for (int n = 0; n < N_; ++n) {
      enumerate_downloader(s, n, per[static_cast<size_t>(n)]);
      for (const auto& kn : per[static_cast<size_t>(n)])
        energy[static_cast<size_t>(n)].push_back(downloader_energy(s, n, kn));
    }
    // counts -> cheapest combination (first in lexicographic order on ties)
    std::map<std::vector<int>, Aggregate> best;
    std::vector<size_t> pick(static_cast<size_t>(N_), 0);
    const size_t width = static_cast<size_t>(N_) * Z_;
    auto rec = [&](auto&& self, int n, std::vector<int>& counts, double e) -> void {
      if (n == N_) {
        auto it = best.find(counts);
        if (it == best.end() || e < it->second.energy - kTieTol) {
          Aggregate a;
          a.counts = counts;
          a.energy = e;
          a.kappa.assign(static_cast<size_t>(N_) * width, 0);
          for (int d = 0; d < N_; ++d) {
            const auto& kd = per[static_cast<size_t>(d)][pick[static_cast<size_t>(d)]];
            std::copy(kd.begin(), kd.end(), a.kappa.begin() + static_cast<long>(d * width));
          }
          best[counts] = std::move(a);
        }
        return;
      }
      const auto& opts = per[static_cast<size_t>(n)];
      for (size_t i = 0; i < opts.size(); ++i) {
        bool ok = true;
        for (size_t j = 0; j < width; ++j) {
          counts[j] += opts[i][j];
          const int m = static_cast<int>(j) / Z_;
          if (counts[j] > inst_.budget[static_cast<size_t>(m)]) ok = false;
        }
        pick[static_cast<size_t>(n)] = i;
        if (ok) self(self, n + 1, counts, e + energy[static_cast<size_t>(n)][i]);
        for (size_t j = 0; j < width; ++j) counts[j] -= opts[i][j];
      }
    };
    std::vector<int> counts(width, 0);
    rec(rec, 0, counts, 0.0);
    std::vector<Aggregate> out;
    out.reserve(best.size());
    for (auto& [c, a] : best) out.push_back(std::move(a));
    std::sort(out.begin(), out.end(),
              [](const Aggregate& a, const Aggregate& b) { return a.kappa < b.kappa; });
    return out;
  }

  /// Applies a slot action; returns false if it breaks a budget or buffer cap.
  bool transition(int s, std::vector<OwnerState>& st, const Aggregate& a, double& reward) const {
    (void)s;
    const double L = inst_.slot_length;
    reward = -a.energy;
    for (int m = 0; m < N_; ++m) {
      const auto& p = inst_.profiles[static_cast<size_t>(m)];
      auto& o = st[static_cast<size_t>(m)];
      double y = 0.0;
      int low = -1, high = -1, cnt = 0;
      for (int z = 0; z < p.levels(); ++z) {
        const int c = a.counts[static_cast<size_t>(m) * Z_ + z];
        if (c == 0) continue;
        cnt += c;
        y += c * p.beta;
        reward += c * (quality_value(p, p.rate(z)) * p.beta - p.eps_time * p.beta -
                       p.eps_rate * p.rate(z) * p.beta);
        if (low < 0) low = z;
        high = z;
      }
      if (o.used + cnt > inst_.budget[static_cast<size_t>(m)]) return false;
      const bool started = o.last >= 0;
      if (cnt > 0) {
        if (started) {
          const double stall = o.pending + std::max(0.0, L - o.q);
          reward -= p.phi_rebuf * stall + p.phi_qdeg * std::max(0.0, p.rate(o.last) - p.rate(low));
        }
        o.pending = 0.0;
        o.last = high;
      } else if (started) {
        o.pending += std::max(0.0, L - o.q);
      }
      o.q = std::max(0.0, o.q - L) + y;
      o.used += cnt;
      if (o.q > p.buffer_cap + kFeasTol) return false;
    }
    return true;
  }

  std::string key(int s, const std::vector<OwnerState>& st) const {
    std::string k;
    k.reserve(8 + st.size() * 32);
    auto put = [&](std::int64_t v) { k.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(s);
    for (const auto& o : st) {
      put(std::llround(o.q * 1e9));
      put(o.last);
      put(std::llround(o.pending * 1e9));
      put(o.used);
    }
    return k;
  }

  double solve(int s, const std::vector<OwnerState>& st) {
    if (s == inst_.slots) return 0.0;
    auto k = key(s, st);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second.value;
    Entry e{-std::numeric_limits<double>::infinity(), -1};
    const auto& acts = actions_[static_cast<size_t>(s)];
    for (size_t i = 0; i < acts.size(); ++i) {
      if (++nodes_ > budget_) throw BudgetExhausted{};
      auto next = st;
      double reward = 0.0;
      if (!transition(s, next, acts[i], reward)) continue;
      const double v = reward + solve(s + 1, next);
      if (v > e.value + kTieTol) {
        e.value = v;
        e.choice = static_cast<int>(i);
      }
      if (s == 0) incumbent_ = std::max(incumbent_, e.value);
    }
    memo_.emplace(std::move(k), e);
    return e.value;
  }

  const SlottedInstance& inst_;
  int N_;
  int Z_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  double incumbent_ = 0.0;
  std::vector<std::vector<Aggregate>> actions_;
  std::unordered_map<std::string, Entry> memo_;
};

}  // namespace

ExactResult solve_slotted_exact(const SlottedInstance& inst, ExactLimits limits) {
  inst.validate();
  ExactResult res;
  if (inst.slots == 0) {
    res.schedule = SlottedSchedule::zeros(inst);
    return res;
  }
  ExactSearch search(inst, limits.node_budget);
  try {
    search.run();
  } catch (const BudgetExhausted&) {
    const double bound = solve_slotted_relaxed(inst).bound;
    throw ResourceError("exact slotted search exceeded its node budget", search.incumbent(), bound);
  }
  res.schedule = search.reconstruct();
  res.welfare = eval_slotted_welfare(inst, res.schedule).welfare;
  res.stats = search.stats();
  return res;
}

}  // namespace crowdstream
