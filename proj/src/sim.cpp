#include "crowdstream/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <set>

namespace crowdstream {

AbortPolicy parse_abort_policy(const std::string& s) {
  if (s == "abort") return AbortPolicy::kAbort;
  if (s == "complete") return AbortPolicy::kComplete;
  throw ConfigError("unknown abort policy '" + s + "'");
}

std::string to_string(AbortPolicy p) { return p == AbortPolicy::kAbort ? "abort" : "complete"; }

void SimConfig::validate() const {
  trace.validate();
  if (static_cast<int>(profiles.size()) != trace.users())
    throw ConfigError("profile count differs from trace user count");
  for (const auto& p : profiles) p.validate();
  if (horizon < 0.0 || horizon > trace.horizon + kFeasTol)
    throw ConfigError("simulation horizon exceeds the trace horizon");
  if (!script) scheduler.validate();
}

std::optional<double> compute_download_end(const NetworkTrace& trace, int n, double t_start,
                                           double volume) {
  if (volume < 0.0) throw ContractViolation("negative transfer volume");
  return trace.capacity.at(static_cast<size_t>(n)).transfer_end(t_start, volume);
}

double gap_vs_upper_bound(double welfare, double upper) {
  return (upper - welfare) / std::max(std::abs(upper), 1e-12);
}

std::vector<ScriptItem> script_from_records(const std::vector<SegmentRecord>& records) {
  std::vector<ScriptItem> out;
  for (const auto& r : records) out.push_back({r.downloader, r.owner, r.level, r.t_start, r.t_recv});
  return out;
}

namespace {

enum class EventKind { kDecide, kFinish, kDeliver };
enum class EndKind { kComplete, kAbort, kTruncate };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  int user;
  std::size_t ref;
  bool operator>(const Event& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

struct Transfer {
  bool active = false;
  std::size_t record = 0;
  EndKind end = EndKind::kComplete;
  double t_recv = 0.0;
};

struct OwnerState {
  double q = 0.0;
  double t_last = 0.0;
  double last_rate = -1.0;
  std::set<int> reserved;
  std::set<int> delivered;
  int budget = 0;
};

class Engine {
 public:
  explicit Engine(const SimConfig& cfg)
      : cfg_(cfg), N_(static_cast<int>(cfg.profiles.size())),
        H_(cfg.horizon > 0.0 ? cfg.horizon : cfg.trace.horizon) {
    owners_.resize(static_cast<size_t>(N_));
    for (int m = 0; m < N_; ++m) {
      const auto& p = cfg_.profiles[static_cast<size_t>(m)];
      owners_[static_cast<size_t>(m)].budget = p.is_video_user ? p.video_segments : 0;
    }
    transfers_.resize(static_cast<size_t>(N_));
    history_.resize(static_cast<size_t>(N_));
    script_.resize(static_cast<size_t>(N_));
    if (cfg_.script) {
      auto items = *cfg_.script;
      std::stable_sort(items.begin(), items.end(),
                       [](const ScriptItem& a, const ScriptItem& b) { return a.t_start < b.t_start; });
      for (const auto& it : items) {
        if (it.downloader < 0 || it.downloader >= N_ || it.owner < 0 || it.owner >= N_)
          throw ConfigError("script refers to an unknown user");
        script_[static_cast<size_t>(it.downloader)].push_back(it);
      }
    }
  }

  SimReport run() {
    for (int n = 0; n < N_; ++n) push(0.0, EventKind::kDecide, n, 0);
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      ++rep_.events;
      switch (ev.kind) {
        case EventKind::kDecide: on_decide(ev.user, ev.time); break;
        case EventKind::kFinish: on_finish(ev.user, ev.time); break;
        case EventKind::kDeliver: on_deliver(ev.ref, ev.time); break;
      }
    }
    finalize();
    return std::move(rep_);
  }

 private:
  void push(double t, EventKind k, int user, std::size_t ref) {
    queue_.push({t, seq_++, k, user, ref});
  }

  void fail(bool& flag, const std::string& what) {
    flag = false;
    if (rep_.invariants.failures.size() < 20) rep_.invariants.failures.push_back(what);
  }

  void advance(int m, double t) {
    auto& o = owners_[static_cast<size_t>(m)];
    if (o.last_rate >= 0.0) o.q = std::max(0.0, o.q - (t - o.t_last));
    o.t_last = t;
  }

  int next_free(int m) const {
    const auto& o = owners_[static_cast<size_t>(m)];
    for (int i = 0; i < o.budget; ++i)
      if (!o.reserved.count(i) && !o.delivered.count(i)) return i;
    return -1;
  }

  SchedulerState snapshot(int n, double t) {
    SchedulerState st;
    st.self = n;
    st.now = t;
    st.capacity = cfg_.trace.capacity_at(n, t);
    for (int m = 0; m < N_; ++m) {
      advance(m, t);
      const auto& o = owners_[static_cast<size_t>(m)];
      if (o.q < -kFeasTol || o.q > cfg_.profiles[static_cast<size_t>(m)].buffer_cap + kFeasTol)
        fail(rep_.invariants.buffer_ok, "buffer of user " + std::to_string(m) + " out of range");
      st.neighbors.push_back(m == n || still_met(n, m, t) ? 1 : 0);
      st.buffer.push_back(o.q);
      st.last_rate.push_back(o.last_rate);
      st.next_segment.push_back(next_free(m));
    }
    st.throughput = history_[static_cast<size_t>(n)];
    return st;
  }

  // An encounter that ends exactly now offers no transfer time.
  bool still_met(int n, int m, double t) const {
    const auto until = cfg_.trace.encounters.interval_end(n, m, t);
    return until && *until > t + kFeasTol;
  }

  void start_transfer(int n, double t, int owner, int level, double t_recv) {
    const int seg = next_free(owner);
    if (seg < 0) return;
    owners_[static_cast<size_t>(owner)].reserved.insert(seg);
    auto r = make_record(cfg_.profiles, n, owner, level, seg, t, t);
    double end = H_;
    EndKind kind = EndKind::kTruncate;
    if (const auto e = compute_download_end(cfg_.trace, n, t, r.volume); e && *e <= H_ + kFeasTol) {
      end = std::min(*e, H_);
      kind = EndKind::kComplete;
    }
    if (cfg_.abort_policy == AbortPolicy::kAbort && owner != n) {
      const auto until = cfg_.trace.encounters.interval_end(n, owner, t);
      const double lost = until ? *until : t;
      if (lost < end - kFeasTol) {
        end = lost;
        kind = EndKind::kAbort;
      }
    }
    r.t_end = end;
    records_.push_back(r);
    auto& tr = transfers_[static_cast<size_t>(n)];
    tr = {true, records_.size() - 1, kind, std::max(t_recv, end)};
    push(end, EventKind::kFinish, n, tr.record);
  }

  void on_decide(int n, double t) {
    if (t >= H_ - kFeasTol || transfers_[static_cast<size_t>(n)].active) return;
    if (cfg_.script) {
      auto& q = script_[static_cast<size_t>(n)];
      while (!q.empty()) {
        const auto it = q.front();
        if (it.t_start > t + kFeasTol) {
          push(it.t_start, EventKind::kDecide, n, 0);
          return;
        }
        q.pop_front();
        if (next_free(it.owner) < 0) continue;
        start_transfer(n, t, it.owner, it.level, it.t_recv);
        return;
      }
      return;
    }
    const auto st = snapshot(n, t);
    const auto d = decide(cfg_.profiles, st, cfg_.scheduler);
    if (d.kind == DecisionKind::kDownload) {
      ++rep_.decisions;
      rep_.sw_prime += d.payoff;
      start_transfer(n, t, d.owner, d.level, t);
    } else {
      ++rep_.waits;
      if (!(d.wait > 0.0)) fail(rep_.invariants.buffer_ok, "nonpositive waiting time");
      const double next = t + std::max(d.wait, 1e-9);
      if (next < H_ - kFeasTol) push(next, EventKind::kDecide, n, 0);
    }
  }

  void on_finish(int n, double t) {
    auto& tr = transfers_[static_cast<size_t>(n)];
    if (!tr.active) return;
    tr.active = false;
    auto& r = records_[tr.record];
    r.t_end = t;
    if (tr.end == EndKind::kComplete) {
      if (t > r.t_start) history_[static_cast<size_t>(n)].push_back(r.volume / (t - r.t_start));
      if (tr.t_recv > t + kFeasTol)
        push(tr.t_recv, EventKind::kDeliver, n, tr.record);
      else
        on_deliver(tr.record, t);
    } else {
      r.volume = std::min(r.volume, cfg_.trace.integrate_capacity(n, r.t_start, t));
      r.delivered = false;
      r.t_recv = t;
      owners_[static_cast<size_t>(r.owner)].reserved.erase(r.seg_index);
      if (tr.end == EndKind::kAbort) ++rep_.aborts; else ++rep_.truncated;
    }
    push(t, EventKind::kDecide, n, 0);
  }

  void on_deliver(std::size_t idx, double t) {
    auto& r = records_[idx];
    const auto& p = cfg_.profiles[static_cast<size_t>(r.owner)];
    auto& o = owners_[static_cast<size_t>(r.owner)];
    advance(r.owner, t);
    o.reserved.erase(r.seg_index);
    r.t_recv = t;
    if (o.q + p.beta > p.buffer_cap + kFeasTol) {
      r.delivered = false;
      ++rep_.drops;
      return;
    }
    if (!o.delivered.insert(r.seg_index).second)
      fail(rep_.invariants.unique_ok, "segment delivered twice");
    o.q += p.beta;
    o.last_rate = r.rate;
    r.delivered = true;
    if (o.q > p.buffer_cap + kFeasTol || o.q < 0.0)
      fail(rep_.invariants.buffer_ok, "buffer out of range after delivery");
  }

  void finalize() {
    // Owners play segments in the order they arrive.
    for (int m = 0; m < N_; ++m) {
      std::vector<std::size_t> mine;
      for (std::size_t i = 0; i < records_.size(); ++i)
        if (records_[i].owner == m && records_[i].delivered) mine.push_back(i);
      std::set<int> seen;
      for (std::size_t i : mine)
        if (!seen.insert(records_[i].seg_index).second)
          fail(rep_.invariants.unique_ok, "duplicate delivered seg_index");
      std::stable_sort(mine.begin(), mine.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = records_[a];
        const auto& rb = records_[b];
        if (std::abs(ra.t_recv - rb.t_recv) > kFeasTol) return ra.t_recv < rb.t_recv;
        return ra.rate < rb.rate;
      });
      for (std::size_t k = 0; k < mine.size(); ++k) records_[mine[k]].seg_index = static_cast<int>(k);
      int undelivered = 0;
      for (std::size_t i = 0; i < records_.size(); ++i)
        if (records_[i].owner == m && !records_[i].delivered) records_[i].seg_index = -1 - undelivered++;
    }

    const auto w = eval_social_welfare(cfg_.profiles, records_);
    rep_.welfare = w.welfare;
    rep_.users = w.users;
    double composed = 0.0, cell = 0.0, cell_records = 0.0;
    for (const auto& b : w.users) {
      composed += b.compose();
      cell += b.cell_energy;
      rep_.rebuffer_s += b.rebuffer_seconds;
    }
    for (const auto& r : records_) {
      const auto& p = cfg_.profiles[static_cast<size_t>(r.downloader)];
      cell_records += p.c_time * (r.t_end - r.t_start) + p.c_data * r.volume;
    }
    if (std::abs(composed - rep_.welfare) > 1e-9 || std::abs(cell - cell_records) > 1e-9)
      fail(rep_.invariants.identity_ok, "welfare identity does not hold");

    double rate_sum = 0.0;
    rep_.user_avg_bitrate.assign(static_cast<size_t>(N_), 0.0);
    std::vector<int> count(static_cast<size_t>(N_), 0);
    for (const auto& r : records_) {
      if (!r.delivered) continue;
      ++rep_.delivered;
      rate_sum += r.rate;
      rep_.user_avg_bitrate[static_cast<size_t>(r.owner)] += r.rate;
      ++count[static_cast<size_t>(r.owner)];
      const double cap = cfg_.trace.integrate_capacity(r.downloader, r.t_start, r.t_end);
      if (r.volume > cap + 1e-9) fail(rep_.invariants.capacity_ok, "delivered beyond capacity");
    }
    for (int m = 0; m < N_; ++m)
      if (count[static_cast<size_t>(m)] > 0) rep_.user_avg_bitrate[static_cast<size_t>(m)] /= count[static_cast<size_t>(m)];
    rep_.avg_bitrate = rep_.delivered > 0 ? rate_sum / rep_.delivered : 0.0;

    for (int m = 0; m < N_; ++m) {
      const auto& p = cfg_.profiles[static_cast<size_t>(m)];
      const auto recv = receiving_sequence(records_, m);
      for (double q : buffer_trajectory(p, recv))
        if (q > p.buffer_cap + kFeasTol) fail(rep_.invariants.buffer_ok, "replayed buffer exceeds cap");
    }
    rep_.records = records_;
  }

  const SimConfig& cfg_;
  int N_;
  double H_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::vector<OwnerState> owners_;
  std::vector<Transfer> transfers_;
  std::vector<std::vector<double>> history_;
  std::vector<std::deque<ScriptItem>> script_;
  std::vector<SegmentRecord> records_;
  SimReport rep_;
};

}  // namespace

SimReport run_simulation(const SimConfig& config) {
  config.validate();
  Engine engine(config);
  return engine.run();
}

}  // namespace crowdstream
