// Exhaustive search over grid-restricted segmented schedules.
//
// Between two grid points every downloader works at capacity rate: it first
// finishes its transfer in progress, then fetches any multiset of new
// segments back to back, optionally leaving one unfinished at the next grid
// point. Finished segments are held by the owner and appended to its buffer
// in batches at grid points, lowest bitrate first.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "crowdstream/offline.hpp"

namespace crowdstream {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-12;

struct Transfer {
  int owner = -1;
  int level = 0;
  double rem = 0.0;  // Mbit still to fetch
};

struct Owner {
  std::vector<int> held;  // per level
  double q = 0.0;
  int last = -1;
  double pending = 0.0;
  int used = 0;
};

struct State {
  std::vector<Transfer> dl;
  std::vector<Owner> own;
};

/// One downloader's work inside one grid interval.
struct Work {
  bool finishes_current = false;
  std::vector<std::pair<int, int>> fresh;  // (owner, level) completed, in fetch order
  int partial_owner = -1;
  int partial_level = 0;
  double energy = 0.0;
};

struct BudgetExhausted {};

class Search {
 public:
  Search(std::span<const UserProfile> profiles, const NetworkTrace& trace,
         const BruteForceOptions& opt)
      : p_(profiles), tr_(trace), N_(static_cast<int>(profiles.size())), budget_(opt.node_budget) {
    for (const auto& p : p_) Z_ = std::max(Z_, p.levels());
    grid_ = tr_.breakpoints();
    if (opt.slot_length > 0.0)
      for (int k = 0; k * opt.slot_length <= tr_.horizon + kFeasTol; ++k)
        grid_.push_back(std::min(tr_.horizon, k * opt.slot_length));
    for (double t : opt.extra_points)
      if (t >= 0.0 && t <= tr_.horizon) grid_.push_back(t);
    grid_.push_back(0.0);
    grid_.push_back(tr_.horizon);
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end(),
                            [](double a, double b) { return std::abs(a - b) <= kFeasTol; }),
                grid_.end());
    const size_t I = grid_.size() > 0 ? grid_.size() - 1 : 0;
    cap_.assign(I, std::vector<double>(static_cast<size_t>(N_), 0.0));
    enc_.assign(I, std::vector<std::vector<char>>(static_cast<size_t>(N_),
                                                   std::vector<char>(static_cast<size_t>(N_), 0)));
    for (size_t j = 0; j < I; ++j)
      for (int n = 0; n < N_; ++n) {
        cap_[j][static_cast<size_t>(n)] = tr_.capacity_at(n, 0.5 * (grid_[j] + grid_[j + 1]));
        for (int m = 0; m < N_; ++m)
          enc_[j][static_cast<size_t>(n)][static_cast<size_t>(m)] =
              tr_.encounter_holds(n, m, grid_[j], grid_[j + 1]) ? 1 : 0;
      }
    for (const auto& p : p_) budgets_.push_back(segment_budget(p));
  }

  double run() {
    State st;
    st.dl.assign(static_cast<size_t>(N_), Transfer{});
    st.own.assign(static_cast<size_t>(N_), Owner{std::vector<int>(static_cast<size_t>(Z_), 0)});
    return at_point(0, st);
  }

  std::vector<SegmentRecord> reconstruct() const;
  double incumbent() const { return incumbent_; }
  SolverStats stats() const {
    SolverStats s;
    s.nodes = nodes_;
    s.states = release_memo_.size() + work_memo_.size();
    return s;
  }

 private:
  struct ReleaseEntry {
    double value = kNegInf;
    std::vector<int> release;  // [m][z]
  };
  struct WorkEntry {
    double value = kNegInf;
    std::vector<Work> work;
  };

  std::string key(int phase, size_t j, const State& st) const {
    std::string k;
    auto put = [&](std::int64_t v) { k.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(phase);
    put(static_cast<std::int64_t>(j));
    for (const auto& d : st.dl) {
      put(d.owner);
      put(d.level);
      put(std::llround(d.rem * 1e9));
    }
    for (const auto& o : st.own) {
      for (int h : o.held) put(h);
      put(std::llround(o.q * 1e9));
      put(o.last);
      put(std::llround(o.pending * 1e9));
      put(o.used);
    }
    return k;
  }

  void tick() {
    if (++nodes_ > budget_) throw BudgetExhausted{};
  }

  /// Applies a release batch at a grid point; false if a buffer overflows.
  bool apply_release(State& st, const std::vector<int>& rel, double& reward) const {
    reward = 0.0;
    for (int m = 0; m < N_; ++m) {
      const auto& p = p_[static_cast<size_t>(m)];
      auto& o = st.own[static_cast<size_t>(m)];
      int cnt = 0, low = -1, high = -1;
      for (int z = 0; z < p.levels(); ++z) {
        const int c = rel[static_cast<size_t>(m) * Z_ + z];
        if (c == 0) continue;
        o.held[static_cast<size_t>(z)] -= c;
        cnt += c;
        const double r = p.rate(z);
        reward += c * (quality_value(p, r) * p.beta - p.eps_time * p.beta - p.eps_rate * r * p.beta);
        if (low < 0) low = z;
        high = z;
      }
      if (cnt == 0) continue;
      if (o.last >= 0)
        reward -= p.phi_rebuf * o.pending + p.phi_qdeg * std::max(0.0, p.rate(o.last) - p.rate(low));
      o.pending = 0.0;
      o.last = high;
      o.q += cnt * p.beta;
      if (o.q > p.buffer_cap + kFeasTol) return false;
    }
    return true;
  }

  double at_point(size_t j, const State& st) {
    auto k = key(0, j, st);
    if (auto it = release_memo_.find(k); it != release_memo_.end()) return it->second.value;
    ReleaseEntry best;
    const size_t width = static_cast<size_t>(N_) * Z_;
    std::vector<int> rel(width, 0);
    std::vector<size_t> slots;
    for (int m = 0; m < N_; ++m)
      for (int z = 0; z < Z_; ++z)
        if (st.own[static_cast<size_t>(m)].held[static_cast<size_t>(z)] > 0)
          slots.push_back(static_cast<size_t>(m) * Z_ + z);
    auto rec = [&](auto&& self, size_t i) -> void {
      if (i == slots.size()) {
        tick();
        State next = st;
        double reward = 0.0;
        if (!apply_release(next, rel, reward)) return;
        const double v = reward + after_release(j, next);
        if (v > best.value + kTieTol) {
          best.value = v;
          best.release = rel;
        }
        return;
      }
      const size_t s = slots[i];
      const int held = st.own[s / Z_].held[s % Z_];
      for (int c = 0; c <= held; ++c) {
        rel[s] = c;
        self(self, i + 1);
      }
      rel[s] = 0;
    };
    rec(rec, 0);
    release_memo_.emplace(std::move(k), best);
    return best.value;
  }

  /// Candidate work lists for downloader n in interval j.
  std::vector<Work> options(size_t j, int n, const State& st) const {
    std::vector<Work> out;
    const auto& pn = p_[static_cast<size_t>(n)];
    const double h = cap_[j][static_cast<size_t>(n)];
    const double len = grid_[j + 1] - grid_[j];
    const auto& enc = enc_[j][static_cast<size_t>(n)];
    auto charge = [&](int owner, double vol) {
      return pn.c_time * vol / h + pn.c_data * vol + (owner != n ? pn.w_data * vol : 0.0);
    };
    Work base;
    double left = h * len;
    const auto& cur = st.dl[static_cast<size_t>(n)];
    if (cur.owner >= 0) {
      if (cur.owner != n && !enc[static_cast<size_t>(cur.owner)]) return out;
      if (!(h > 0.0)) {
        base.energy = pn.c_time * len;
        out.push_back(base);
        return out;
      }
      if (left + kFeasTol < cur.rem) {
        base.energy = charge(cur.owner, left);
        out.push_back(base);
        return out;
      }
      base.finishes_current = true;
      base.energy = charge(cur.owner, cur.rem);
      left = std::max(0.0, left - cur.rem);
    }
    if (!(h > 0.0)) {
      out.push_back(base);
      return out;
    }
    std::vector<std::pair<int, int>> kinds;
    for (int m = 0; m < N_; ++m) {
      if (budgets_[static_cast<size_t>(m)] == 0) continue;
      if (m != n && !enc[static_cast<size_t>(m)]) continue;
      for (int z = 0; z < p_[static_cast<size_t>(m)].levels(); ++z) kinds.push_back({m, z});
    }
    Work w = base;
    auto rec = [&](auto&& self, size_t i, double rest) -> void {
      if (i == kinds.size()) {
        out.push_back(w);
        if (rest > kFeasTol)
          for (const auto& [m, z] : kinds) {
            const double v = p_[static_cast<size_t>(m)].segment_volume(z);
            if (v <= rest + kFeasTol) continue;
            Work wp = w;
            wp.partial_owner = m;
            wp.partial_level = z;
            wp.energy += charge(m, rest);
            out.push_back(std::move(wp));
          }
        return;
      }
      const auto [m, z] = kinds[i];
      const double v = p_[static_cast<size_t>(m)].segment_volume(z);
      const size_t before = w.fresh.size();
      const double e0 = w.energy;
      const int room = budgets_[static_cast<size_t>(m)];
      for (int c = 0; c <= room && c * v <= rest + kFeasTol; ++c) {
        w.fresh.resize(before);
        w.energy = e0;
        for (int r = 0; r < c; ++r) {
          w.fresh.push_back({m, z});
          w.energy += charge(m, v);
        }
        self(self, i + 1, rest - c * v);
      }
      w.fresh.resize(before);
      w.energy = e0;
    };
    rec(rec, 0, left);
    return out;
  }

  /// Applies everyone's work for interval j and advances the buffers.
  bool apply_work(size_t j, State& st, const std::vector<Work>& work) const {
    const double len = grid_[j + 1] - grid_[j];
    for (int n = 0; n < N_; ++n) {
      const auto& w = work[static_cast<size_t>(n)];
      auto& cur = st.dl[static_cast<size_t>(n)];
      const double h = cap_[j][static_cast<size_t>(n)];
      double used = 0.0;
      if (cur.owner >= 0) {
        if (w.finishes_current) {
          st.own[static_cast<size_t>(cur.owner)].held[static_cast<size_t>(cur.level)]++;
          used = cur.rem;
          cur = Transfer{};
        } else {
          cur.rem = std::max(0.0, cur.rem - h * len);
          continue;
        }
      }
      for (const auto& [m, z] : w.fresh) {
        auto& o = st.own[static_cast<size_t>(m)];
        o.held[static_cast<size_t>(z)]++;
        o.used++;
        used += p_[static_cast<size_t>(m)].segment_volume(z);
      }
      if (w.partial_owner >= 0) {
        auto& o = st.own[static_cast<size_t>(w.partial_owner)];
        o.used++;
        cur.owner = w.partial_owner;
        cur.level = w.partial_level;
        const double done = h * len - used;
        cur.rem = p_[static_cast<size_t>(w.partial_owner)].segment_volume(w.partial_level) - done;
      }
    }
    for (int m = 0; m < N_; ++m) {
      auto& o = st.own[static_cast<size_t>(m)];
      if (o.used > budgets_[static_cast<size_t>(m)]) return false;
      if (o.last >= 0) {
        o.pending += std::max(0.0, len - o.q);
        o.q = std::max(0.0, o.q - len);
      }
    }
    return true;
  }

  double after_release(size_t j, const State& st) {
    if (j + 1 == grid_.size()) {
      for (const auto& d : st.dl)
        if (d.owner >= 0) return kNegInf;
      for (const auto& o : st.own)
        for (int h : o.held)
          if (h > 0) return kNegInf;
      return 0.0;
    }
    auto k = key(1, j, st);
    if (auto it = work_memo_.find(k); it != work_memo_.end()) return it->second.value;
    WorkEntry best;
    std::vector<std::vector<Work>> opts(static_cast<size_t>(N_));
    bool dead = false;
    for (int n = 0; n < N_; ++n) {
      opts[static_cast<size_t>(n)] = options(j, n, st);
      if (opts[static_cast<size_t>(n)].empty()) dead = true;
    }
    if (!dead) {
      std::vector<Work> pick(static_cast<size_t>(N_));
      auto rec = [&](auto&& self, int n, double energy) -> void {
        if (n == N_) {
          tick();
          State next = st;
          if (!apply_work(j, next, pick)) return;
          const double tail = at_point(j + 1, next);
          if (tail == kNegInf) return;
          const double v = tail - energy;
          if (v > best.value + kTieTol) {
            best.value = v;
            best.work = pick;
          }
          if (j == 0) incumbent_ = std::max(incumbent_, best.value);
          return;
        }
        for (const auto& w : opts[static_cast<size_t>(n)]) {
          pick[static_cast<size_t>(n)] = w;
          self(self, n + 1, energy + w.energy);
        }
      };
      rec(rec, 0, 0.0);
    }
    work_memo_.emplace(std::move(k), best);
    return best.value;
  }

  std::span<const UserProfile> p_;
  const NetworkTrace& tr_;
  int N_;
  int Z_ = 1;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  double incumbent_ = 0.0;
  std::vector<double> grid_;
  std::vector<std::vector<double>> cap_;
  std::vector<std::vector<std::vector<char>>> enc_;
  std::vector<int> budgets_;
  std::unordered_map<std::string, ReleaseEntry> release_memo_;
  std::unordered_map<std::string, WorkEntry> work_memo_;
};

std::vector<SegmentRecord> Search::reconstruct() const {
  std::vector<SegmentRecord> recs;
  State st;
  st.dl.assign(static_cast<size_t>(N_), Transfer{});
  st.own.assign(static_cast<size_t>(N_), Owner{std::vector<int>(static_cast<size_t>(Z_), 0)});
  std::vector<int> active(static_cast<size_t>(N_), -1);  // record index in progress
  // held[m][z]: record indices waiting for release, oldest first
  std::vector<std::vector<std::deque<size_t>>> held(
      static_cast<size_t>(N_), std::vector<std::deque<size_t>>(static_cast<size_t>(Z_)));
  std::vector<int> next_index(static_cast<size_t>(N_), 0);

  for (size_t j = 0; j < grid_.size(); ++j) {
    const auto rit = release_memo_.find(key(0, j, st));
    if (rit == release_memo_.end() || rit->second.value == kNegInf) break;
    const auto& rel = rit->second.release;
    if (!rel.empty()) {
      double reward = 0.0;
      apply_release(st, rel, reward);
      for (int m = 0; m < N_; ++m)
        for (int z = 0; z < Z_; ++z)
          for (int c = 0; c < rel[static_cast<size_t>(m) * Z_ + z]; ++c) {
            auto& qd = held[static_cast<size_t>(m)][static_cast<size_t>(z)];
            auto& r = recs[qd.front()];
            qd.pop_front();
            r.t_recv = grid_[j];
            r.seg_index = next_index[static_cast<size_t>(m)]++;
          }
    }
    if (j + 1 == grid_.size()) break;
    const auto wit = work_memo_.find(key(1, j, st));
    if (wit == work_memo_.end() || wit->second.value == kNegInf) break;
    const auto& work = wit->second.work;
    for (int n = 0; n < N_; ++n) {
      const auto& w = work[static_cast<size_t>(n)];
      const double h = cap_[j][static_cast<size_t>(n)];
      double t = grid_[j];
      auto& a = active[static_cast<size_t>(n)];
      if (a >= 0) {
        if (!w.finishes_current) continue;
        auto& r = recs[static_cast<size_t>(a)];
        t += st.dl[static_cast<size_t>(n)].rem / h;
        r.t_end = t;
        held[static_cast<size_t>(r.owner)][static_cast<size_t>(r.level)].push_back(static_cast<size_t>(a));
        a = -1;
      }
      for (const auto& [m, z] : w.fresh) {
        const double dur = p_[static_cast<size_t>(m)].segment_volume(z) / h;
        recs.push_back(make_record(p_, n, m, z, -1, t, t + dur));
        t += dur;
        held[static_cast<size_t>(m)][static_cast<size_t>(z)].push_back(recs.size() - 1);
      }
      if (w.partial_owner >= 0) {
        recs.push_back(make_record(p_, n, w.partial_owner, w.partial_level, -1, t, t));
        a = static_cast<int>(recs.size()) - 1;
      }
    }
    apply_work(j, st, work);
  }
  for (auto& r : recs) r.t_end = std::max(r.t_end, r.t_start), r.t_recv = std::max(r.t_recv, r.t_end);
  return recs;
}

}  // namespace

BruteForceResult brute_force_segmented(std::span<const UserProfile> profiles,
                                       const NetworkTrace& trace,
                                       const BruteForceOptions& options) {
  if (static_cast<int>(profiles.size()) != trace.users())
    throw ConfigError("profile count differs from trace user count");
  for (const auto& p : profiles) p.validate();
  BruteForceResult res;
  if (trace.horizon <= 0.0 || profiles.empty()) return res;
  Search search(profiles, trace, options);
  double dp = 0.0;
  try {
    dp = search.run();
  } catch (const BudgetExhausted&) {
    throw ResourceError("segmented search exceeded its node budget", search.incumbent(),
                        std::numeric_limits<double>::infinity());
  }
  res.schedule = search.reconstruct();
  const auto bad = validate_sequences(profiles, trace, res.schedule);
  if (!bad.empty())
    throw IntegrityError("segmented search produced an infeasible schedule: " +
                         bad.front().constraint + " " + bad.front().detail);
  res.welfare = eval_social_welfare(profiles, res.schedule).welfare;
  if (std::abs(res.welfare - dp) > 1e-6 * std::max(1.0, std::abs(dp)))
    throw IntegrityError("segmented search value does not match the replayed schedule");
  res.stats = search.stats();
  return res;
}

}  // namespace crowdstream
