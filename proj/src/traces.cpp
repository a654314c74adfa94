#include "crowdstream/traces.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "crowdstream/errors.hpp"

namespace crowdstream {

namespace {

constexpr double kTimeTol = 1e-9;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

}  // namespace

// ---- CapacityTrace ----------------------------------------------------------

CapacityTrace::CapacityTrace(std::vector<double> times, std::vector<double> rates,
                             double horizon)
    : times_(std::move(times)), rates_(std::move(rates)), horizon_(horizon) {
  if (times_.empty() || times_.size() != rates_.size())
    throw ConfigError("capacity trace: times and rates must be non-empty and equal length");
  if (times_.front() != 0.0) throw ConfigError("capacity trace: first breakpoint must be 0");
  if (horizon_ < 0.0) throw ConfigError("capacity trace: negative horizon");
  for (size_t i = 0; i < times_.size(); ++i) {
    if (rates_[i] < 0.0 || !std::isfinite(rates_[i]))
      throw ConfigError("capacity trace: rates must be finite and >= 0");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw ConfigError("capacity trace: breakpoints must be strictly increasing");
  }
  // Breakpoints at or past the horizon carry no information.
  while (times_.size() > 1 && times_.back() >= horizon_) {
    times_.pop_back();
    rates_.pop_back();
  }
}

CapacityTrace CapacityTrace::constant(double rate, double horizon) {
  return CapacityTrace({0.0}, {rate}, horizon);
}

size_t CapacityTrace::piece(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<size_t>(std::distance(times_.begin(), it)) - 1;
}

double CapacityTrace::at(double t) const {
  if (t < -kTimeTol || t > horizon_ + kTimeTol)
    throw std::out_of_range("capacity query outside [0, T]");
  return rates_[piece(std::clamp(t, 0.0, horizon_))];
}

double CapacityTrace::integrate(double t1, double t2) const {
  if (t1 > t2 + kTimeTol) throw std::out_of_range("capacity integral with t1 > t2");
  if (t1 < -kTimeTol || t2 > horizon_ + kTimeTol)
    throw std::out_of_range("capacity integral outside [0, T]");
  t1 = std::clamp(t1, 0.0, horizon_);
  t2 = std::clamp(t2, t1, horizon_);
  double total = 0.0;
  for (size_t i = piece(t1); i < times_.size(); ++i) {
    const double lo = std::max(t1, times_[i]);
    const double hi = std::min(t2, i + 1 < times_.size() ? times_[i + 1] : horizon_);
    if (hi <= lo) {
      if (times_[i] >= t2) break;
      continue;
    }
    total += rates_[i] * (hi - lo);
  }
  return total;
}

std::optional<double> CapacityTrace::transfer_end(double t_start, double volume) const {
  if (volume < 0.0) throw ContractViolation("negative transfer volume");
  if (t_start < -kTimeTol || t_start > horizon_ + kTimeTol)
    throw std::out_of_range("transfer start outside [0, T]");
  t_start = std::clamp(t_start, 0.0, horizon_);
  if (volume == 0.0) return t_start;
  double remaining = volume;
  for (size_t i = piece(t_start); i < times_.size(); ++i) {
    const double lo = std::max(t_start, times_[i]);
    const double hi = i + 1 < times_.size() ? times_[i + 1] : horizon_;
    if (hi <= lo) continue;
    const double avail = rates_[i] * (hi - lo);
    if (rates_[i] > 0.0 && avail >= remaining) return lo + remaining / rates_[i];
    remaining -= avail;
  }
  return std::nullopt;
}

double CapacityTrace::mean() const {
  return horizon_ > 0.0 ? integrate(0.0, horizon_) / horizon_ : rates_.front();
}

// ---- EncounterTrace ---------------------------------------------------------

EncounterTrace EncounterTrace::full(int users, double horizon) {
  EncounterTrace tr(users, horizon);
  for (int n = 0; n < users; ++n)
    for (int m = n + 1; m < users; ++m) tr.add(n, m, {0.0, horizon});
  return tr;
}

void EncounterTrace::add(int n, int m, Interval iv) {
  if (n == m) return;
  if (n < 0 || m < 0 || n >= users_ || m >= users_)
    throw ConfigError("encounter pair references an unknown user");
  if (iv.start > iv.end) throw ConfigError("encounter interval with start > end");
  iv.start = std::max(0.0, iv.start);
  iv.end = std::min(horizon_, iv.end);
  if (iv.start > iv.end) return;
  auto& list = pairs_[key(n, m)];
  list.push_back(iv);
  std::sort(list.begin(), list.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> merged;
  for (const auto& x : list) {
    if (!merged.empty() && x.start <= merged.back().end)
      merged.back().end = std::max(merged.back().end, x.end);
    else
      merged.push_back(x);
  }
  list = std::move(merged);
}

const std::vector<Interval>& EncounterTrace::intervals(int n, int m) const {
  static const std::vector<Interval> kEmpty;
  auto it = pairs_.find(key(n, m));
  return it == pairs_.end() ? kEmpty : it->second;
}

void EncounterTrace::check_range(double t) const {
  if (t < -kTimeTol || t > horizon_ + kTimeTol)
    throw std::out_of_range("encounter query outside [0, T]");
}

bool EncounterTrace::encountered(int n, int m, double t) const {
  check_range(t);
  if (n == m) return true;
  for (const auto& iv : intervals(n, m))
    if (iv.start - kTimeTol <= t && t <= iv.end + kTimeTol) return true;
  return false;
}

bool EncounterTrace::holds(int n, int m, double t1, double t2) const {
  check_range(t1);
  check_range(t2);
  if (n == m) return true;
  for (const auto& iv : intervals(n, m))
    if (iv.start - kTimeTol <= t1 && t2 <= iv.end + kTimeTol) return true;
  return false;
}

std::optional<double> EncounterTrace::interval_end(int n, int m, double t) const {
  if (n == m) return horizon_;
  for (const auto& iv : intervals(n, m))
    if (iv.start - kTimeTol <= t && t <= iv.end + kTimeTol) return iv.end;
  return std::nullopt;
}

// ---- NetworkTrace -----------------------------------------------------------

std::vector<double> NetworkTrace::breakpoints() const {
  std::vector<double> pts{0.0, horizon};
  for (const auto& c : capacity)
    for (double t : c.times())
      if (t <= horizon) pts.push_back(t);
  for (const auto& [pair, list] : encounters.pairs())
    for (const auto& iv : list) {
      pts.push_back(iv.start);
      pts.push_back(iv.end);
    }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double t : pts)
    if (out.empty() || t - out.back() > kTimeTol) out.push_back(t);
  return out;
}

void NetworkTrace::validate() const {
  if (horizon < 0.0) throw ConfigError("trace horizon must be >= 0");
  if (encounters.users() != users())
    throw ConfigError("encounter trace user count differs from capacity traces");
  for (const auto& c : capacity)
    if (c.horizon() + kTimeTol < horizon)
      throw ConfigError("capacity trace shorter than the network horizon");
  if (encounters.horizon() + kTimeTol < horizon)
    throw ConfigError("encounter trace shorter than the network horizon");
}

// ---- ingestion ----------------------------------------------------------------

SessionEncounters encounters_from_sessions(const std::vector<SessionLogRecord>& records,
                                           std::optional<double> horizon) {
  SessionEncounters out;
  double t_max = 0.0;
  for (const auto& r : records) {
    if (r.login_time > r.logout_time)
      throw ConfigError("session with login after logout for user " + std::to_string(r.user_id));
    out.user_ids.push_back(r.user_id);
    t_max = std::max(t_max, r.logout_time);
  }
  std::sort(out.user_ids.begin(), out.user_ids.end());
  out.user_ids.erase(std::unique(out.user_ids.begin(), out.user_ids.end()), out.user_ids.end());
  auto index = [&](std::int64_t id) {
    return static_cast<int>(std::lower_bound(out.user_ids.begin(), out.user_ids.end(), id) -
                            out.user_ids.begin());
  };
  out.trace = EncounterTrace(static_cast<int>(out.user_ids.size()), horizon.value_or(t_max));

  std::map<std::string, std::vector<const SessionLogRecord*>> by_hotspot;
  for (const auto& r : records) by_hotspot[r.hotspot_id].push_back(&r);
  for (const auto& [hotspot, list] : by_hotspot) {
    for (size_t i = 0; i < list.size(); ++i)
      for (size_t j = i + 1; j < list.size(); ++j) {
        const auto& a = *list[i];
        const auto& b = *list[j];
        if (a.user_id == b.user_id) continue;
        const double s = std::max(a.login_time, b.login_time);
        const double e = std::min(a.logout_time, b.logout_time);
        if (s < e) out.trace.add(index(a.user_id), index(b.user_id), {s, e});
      }
  }
  return out;
}

CapacityTrace capacity_from_viewing_log(const std::vector<ViewingLogRecord>& records,
                                        double horizon) {
  if (records.empty()) throw ConfigError("viewing log: no samples");
  std::vector<double> times, rates;
  double t = 0.0;
  for (const auto& r : records) {
    if (!(r.download_time > 0.0)) throw ConfigError("viewing log: nonpositive download time");
    if (!(r.seg_length > 0.0) || !(r.bitrate > 0.0))
      throw ConfigError("viewing log: nonpositive segment length or bitrate");
    if (t >= horizon && !times.empty()) break;
    times.push_back(t);
    rates.push_back(r.bitrate * r.seg_length / r.download_time);
    t += r.download_time;
  }
  return CapacityTrace(std::move(times), std::move(rates), horizon);
}

// ---- synthesis ----------------------------------------------------------------

void CapacityModel::validate() const {
  if (!(mean_lo >= 0.0) || !(mean_hi >= mean_lo))
    throw ConfigError("capacity model: need 0 <= mean_lo <= mean_hi");
  if (!(mean_hold_s > 0.0)) throw ConfigError("capacity model: mean hold time must be > 0");
  if (multipliers.empty()) throw ConfigError("capacity model: no multipliers");
  for (double m : multipliers)
    if (!(m >= 0.0)) throw ConfigError("capacity model: multipliers must be >= 0");
}

void EncounterModel::validate() const {
  if (mode == Cooperation::kRandom && (!(mean_on_s > 0.0) || !(mean_off_s > 0.0)))
    throw ConfigError("encounter model: ON/OFF means must be > 0");
}

CapacityTrace synth_capacity(std::uint64_t seed, int user, double horizon,
                             const CapacityModel& model) {
  model.validate();
  auto rng = stream(seed, 1, static_cast<std::uint64_t>(user));
  std::uniform_real_distribution<double> mean_dist(model.mean_lo, model.mean_hi);
  const double mean = model.mean_lo == model.mean_hi ? model.mean_lo : mean_dist(rng);
  double norm = 0.0;
  for (double m : model.multipliers) norm += m;
  norm /= static_cast<double>(model.multipliers.size());
  std::uniform_int_distribution<size_t> state_dist(0, model.multipliers.size() - 1);
  std::exponential_distribution<double> hold(1.0 / model.mean_hold_s);

  std::vector<double> times, rates;
  double t = 0.0;
  while (t < horizon || times.empty()) {
    const double r = norm > 0.0 ? mean * model.multipliers[state_dist(rng)] / norm : 0.0;
    if (!rates.empty() && rates.back() == r) {
      t += hold(rng);
      continue;
    }
    times.push_back(t);
    rates.push_back(r);
    t += hold(rng);
  }
  return CapacityTrace(std::move(times), std::move(rates), horizon);
}

EncounterTrace synth_encounters(std::uint64_t seed, int users, double horizon,
                                const EncounterModel& model) {
  model.validate();
  switch (model.mode) {
    case Cooperation::kNone:
      return EncounterTrace::none(users, horizon);
    case Cooperation::kFull:
      return EncounterTrace::full(users, horizon);
    case Cooperation::kRandom:
      break;
  }
  EncounterTrace tr(users, horizon);
  for (int n = 0; n < users; ++n)
    for (int m = n + 1; m < users; ++m) {
      auto rng = stream(seed, 2, static_cast<std::uint64_t>(n) * 100003u + static_cast<std::uint64_t>(m));
      std::exponential_distribution<double> on(1.0 / model.mean_on_s);
      std::exponential_distribution<double> off(1.0 / model.mean_off_s);
      std::bernoulli_distribution start_on(model.mean_on_s / (model.mean_on_s + model.mean_off_s));
      bool is_on = start_on(rng);
      double t = 0.0;
      while (t < horizon) {
        const double len = is_on ? on(rng) : off(rng);
        if (is_on) tr.add(n, m, {t, std::min(horizon, t + len)});
        t += len;
        is_on = !is_on;
      }
    }
  return tr;
}

NetworkTrace synth_network(std::uint64_t seed, int users, double horizon,
                           const CapacityModel& cap, const EncounterModel& enc) {
  NetworkTrace tr;
  tr.horizon = horizon;
  for (int n = 0; n < users; ++n) tr.capacity.push_back(synth_capacity(seed, n, horizon, cap));
  tr.encounters = synth_encounters(seed, users, horizon, enc);
  return tr;
}

Cooperation parse_cooperation(const std::string& s) {
  if (s == "none") return Cooperation::kNone;
  if (s == "full") return Cooperation::kFull;
  if (s == "trace" || s == "random") return Cooperation::kRandom;
  throw ConfigError("unknown cooperation mode '" + s + "'");
}

std::string to_string(Cooperation c) {
  switch (c) {
    case Cooperation::kNone: return "none";
    case Cooperation::kFull: return "full";
    case Cooperation::kRandom: return "trace";
  }
  return "none";
}

}  // namespace crowdstream
