#include "crowdstream/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdstream {

namespace {

constexpr double kTieTol = 1e-12;

size_t at(int i) { return static_cast<size_t>(i); }

bool started(const SchedulerState& st, int m) { return st.last_rate[at(m)] >= 0.0; }

bool fits(std::span<const UserProfile> profiles, const SchedulerState& st, int u) {
  const auto& p = profiles[at(u)];
  return st.buffer[at(u)] + p.beta <= p.buffer_cap + kFeasTol;
}

bool can_download_for(std::span<const UserProfile> profiles, const SchedulerState& st, int u) {
  return st.neighbors[at(u)] && is_active(profiles, st, u) && fits(profiles, st, u);
}

void check_feasible(std::span<const UserProfile> profiles, const SchedulerState& st, int u, int z) {
  if (u < 0 || u >= static_cast<int>(profiles.size()) || z < 0 || z >= profiles[at(u)].levels())
    throw ContractViolation("unknown owner or level");
  if (!can_download_for(profiles, st, u))
    throw ContractViolation("owner is not a feasible download target");
  if (!(st.capacity > 0.0)) throw ContractViolation("no capacity");
}

Decision download(std::span<const UserProfile> profiles, const SchedulerState& st, int u, int z) {
  Decision d;
  d.kind = DecisionKind::kDownload;
  d.owner = u;
  d.level = z;
  d.seg_index = st.next_segment[at(u)];
  d.payoff = decision_payoff(profiles, st, u, z);
  return d;
}

/// No feasible download: wait for the first buffer to make room, or re-poll.
Decision wait_decision(std::span<const UserProfile> profiles, const SchedulerState& st,
                       double default_wait) {
  Decision d;
  d.wait = default_wait;
  if (!(st.capacity > 0.0)) return d;
  double tw = std::numeric_limits<double>::infinity();
  const int N = static_cast<int>(profiles.size());
  for (int m = 0; m < N; ++m) {
    if (!st.neighbors[at(m)] || !is_active(profiles, st, m)) continue;
    const auto& p = profiles[at(m)];
    tw = std::min(tw, st.buffer[at(m)] + p.beta - p.buffer_cap);
  }
  if (std::isfinite(tw) && tw > 0.0) d.wait = tw;
  return d;
}

}  // namespace

void SchedulerParams::validate() const {
  if (name != "lyapunov" && name != "buffer" && name != "prediction")
    throw ConfigError("unknown scheduler '" + name + "'");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (!(delta_th >= 0.0) || !(Delta_th >= 0.0)) throw ConfigError("thresholds must be nonnegative");
  if (!(reservoir >= 0.0 && reservoir < 1.0)) throw ConfigError("reservoir must lie in [0, 1)");
  if (window < 1) throw ConfigError("prediction window must be positive");
  if (!(default_wait > 0.0)) throw ConfigError("default wait must be positive");
}

bool is_active(std::span<const UserProfile> profiles, const SchedulerState& st, int m) {
  return profiles[at(m)].is_video_user && st.next_segment[at(m)] >= 0;
}

std::optional<double> estimate_download_time(std::span<const UserProfile> profiles,
                                             const SchedulerState& st, int u, int z) {
  if (!(st.capacity > 0.0)) return std::nullopt;
  return profiles[at(u)].segment_volume(z) / st.capacity;
}

double decision_payoff(std::span<const UserProfile> profiles, const SchedulerState& st, int u,
                       int z) {
  check_feasible(profiles, st, u, z);
  const double gamma = *estimate_download_time(profiles, st, u, z);
  const auto& pu = profiles[at(u)];
  const auto& pn = profiles[at(st.self)];
  const double R = pu.rate(z);
  double P = quality_value(pu, R) * pu.beta;
  if (started(st, u)) {
    P -= pu.phi_qdeg * std::max(0.0, st.last_rate[at(u)] - R);
    P -= pu.phi_rebuf * std::max(0.0, gamma - st.buffer[at(u)]);
  }
  const int N = static_cast<int>(profiles.size());
  for (int m = 0; m < N; ++m) {
    if (m == u || !is_active(profiles, st, m) || !started(st, m)) continue;
    P -= profiles[at(m)].phi_rebuf * std::max(0.0, gamma - st.buffer[at(m)]);
  }
  const double vol = R * pu.beta;
  P -= pn.c_time * gamma + pn.c_data * vol + (u != st.self ? pn.w_data * vol : 0.0);
  P -= pu.eps_time * pu.beta + pu.eps_rate * vol;
  return P;
}

double lyapunov_drift(std::span<const UserProfile> profiles, const SchedulerState& st, int u,
                      int z) {
  check_feasible(profiles, st, u, z);
  const double gamma = *estimate_download_time(profiles, st, u, z);
  double delta = 0.0;
  const int N = static_cast<int>(profiles.size());
  for (int m = 0; m < N; ++m) {
    if (m != u && !is_active(profiles, st, m)) continue;
    const auto& p = profiles[at(m)];
    const double q = st.buffer[at(m)];
    double q2 = std::max(0.0, q - gamma);
    if (m == u) q2 = std::min(p.buffer_cap, q2 + p.beta);
    const double a = p.buffer_cap - q2, b = p.buffer_cap - q;
    delta += 0.5 * (a * a - b * b);
  }
  return delta;
}

Decision lyapunov_decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                         double lambda, double default_wait) {
  if (!(st.capacity > 0.0)) return wait_decision(profiles, st, default_wait);
  const int N = static_cast<int>(profiles.size());
  int bu = -1, bz = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int u = 0; u < N; ++u) {
    if (!can_download_for(profiles, st, u)) continue;
    for (int z = 0; z < profiles[at(u)].levels(); ++z) {
      const double phi = lyapunov_drift(profiles, st, u, z) - lambda * decision_payoff(profiles, st, u, z);
      if (phi < best - kTieTol) {
        best = phi;
        bu = u;
        bz = z;
      }
    }
  }
  if (bu < 0) return wait_decision(profiles, st, default_wait);
  return download(profiles, st, bu, bz);
}

double predict_capacity(std::span<const double> history, double current, int window) {
  if (history.empty() || window < 1) return current;
  const size_t k = std::min(history.size(), static_cast<size_t>(window));
  double inv = 0.0;
  for (size_t i = history.size() - k; i < history.size(); ++i) {
    if (!(history[i] > 0.0)) return 0.0;
    inv += 1.0 / history[i];
  }
  return static_cast<double>(k) / inv;
}

std::optional<int> select_owner(std::span<const UserProfile> profiles, const SchedulerState& st,
                                double delta_th, double Delta_th) {
  const int N = static_cast<int>(profiles.size());
  const int n = st.self;
  int helpee = -1;
  for (int u = 0; u < N; ++u) {
    if (u == n || !can_download_for(profiles, st, u)) continue;
    if (helpee < 0 || st.buffer[at(u)] < st.buffer[at(helpee)]) helpee = u;
  }
  if (!can_download_for(profiles, st, n)) {
    if (helpee >= 0) return helpee;
    return std::nullopt;
  }
  if (helpee < 0) return n;
  const auto& pn = profiles[at(n)];
  const double qn = st.buffer[at(n)];
  const double qu = st.buffer[at(helpee)];
  if (qn >= delta_th * pn.buffer_cap && qn - qu >= Delta_th) return helpee;
  return n;
}

Decision buffer_based_decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                             const SchedulerParams& params) {
  if (!(st.capacity > 0.0)) return wait_decision(profiles, st, params.default_wait);
  const auto u = select_owner(profiles, st, params.delta_th, params.Delta_th);
  if (!u) return wait_decision(profiles, st, params.default_wait);
  const auto& p = profiles[at(*u)];
  const double lo = params.reservoir * p.buffer_cap;
  const double q = st.buffer[at(*u)];
  const int top = p.levels() - 1;
  int z = 0;
  if (q >= p.buffer_cap) {
    z = top;
  } else if (q > lo) {
    z = static_cast<int>(std::lround((q - lo) / (p.buffer_cap - lo) * top));
  }
  return download(profiles, st, *u, std::clamp(z, 0, top));
}

Decision prediction_based_decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                                 const SchedulerParams& params) {
  if (!(st.capacity > 0.0)) return wait_decision(profiles, st, params.default_wait);
  const auto u = select_owner(profiles, st, params.delta_th, params.Delta_th);
  if (!u) return wait_decision(profiles, st, params.default_wait);
  const auto& p = profiles[at(*u)];
  const double pred = predict_capacity(st.throughput, st.capacity, params.window);
  int z = 0;
  for (int k = 0; k < p.levels(); ++k)
    if (p.rate(k) <= pred) z = k;
  return download(profiles, st, *u, z);
}

Decision decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                const SchedulerParams& params) {
  if (params.name == "lyapunov") return lyapunov_decide(profiles, st, params.lambda, params.default_wait);
  if (params.name == "buffer") return buffer_based_decide(profiles, st, params);
  if (params.name == "prediction") return prediction_based_decide(profiles, st, params);
  throw ConfigError("unknown scheduler '" + params.name + "'");
}

}  // namespace crowdstream
