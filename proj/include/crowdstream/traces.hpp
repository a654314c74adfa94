#pragma once

// Network information: per-user piecewise-constant cellular capacity and
// pairwise encounter intervals over [0, T].

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace crowdstream {

struct Interval {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const Interval&) const = default;
};

/// h(t): rates[i] holds on [times[i], times[i+1]); the last rate holds up to
/// and including the horizon.
class CapacityTrace {
 public:
  CapacityTrace() = default;
  CapacityTrace(std::vector<double> times, std::vector<double> rates, double horizon);
  static CapacityTrace constant(double rate, double horizon);

  double horizon() const { return horizon_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& rates() const { return rates_; }

  double at(double t) const;
  /// Exact integral of h over [t1, t2] (Mbit).
  double integrate(double t1, double t2) const;
  /// Smallest t_end with integral over [t_start, t_end] equal to `volume`;
  /// nullopt if the horizon is reached first.
  std::optional<double> transfer_end(double t_start, double volume) const;
  double mean() const;

  bool operator==(const CapacityTrace&) const = default;

 private:
  size_t piece(double t) const;

  std::vector<double> times_;
  std::vector<double> rates_;
  double horizon_ = 0.0;
};

/// Symmetric pairwise encounter indicator. Every user always encounters
/// itself.
class EncounterTrace {
 public:
  EncounterTrace() = default;
  EncounterTrace(int users, double horizon) : users_(users), horizon_(horizon) {}

  static EncounterTrace full(int users, double horizon);
  static EncounterTrace none(int users, double horizon) { return {users, horizon}; }

  int users() const { return users_; }
  double horizon() const { return horizon_; }

  /// Adds a closed interval for the pair, merging with overlapping ones.
  void add(int n, int m, Interval iv);
  const std::vector<Interval>& intervals(int n, int m) const;

  bool encountered(int n, int m, double t) const;
  /// True iff e_{n,m}(t) = 1 for every t in [t1, t2].
  bool holds(int n, int m, double t1, double t2) const;
  /// End of the encounter interval containing t, or nullopt.
  std::optional<double> interval_end(int n, int m, double t) const;

  const std::map<std::pair<int, int>, std::vector<Interval>>& pairs() const { return pairs_; }

  bool operator==(const EncounterTrace&) const = default;

 private:
  void check_range(double t) const;
  static std::pair<int, int> key(int n, int m) { return n < m ? std::pair{n, m} : std::pair{m, n}; }

  int users_ = 0;
  double horizon_ = 0.0;
  std::map<std::pair<int, int>, std::vector<Interval>> pairs_;
};

struct NetworkTrace {
  double horizon = 0.0;
  std::vector<CapacityTrace> capacity;
  EncounterTrace encounters;

  int users() const { return static_cast<int>(capacity.size()); }
  double capacity_at(int n, double t) const { return capacity.at(n).at(t); }
  double integrate_capacity(int n, double t1, double t2) const {
    return capacity.at(n).integrate(t1, t2);
  }
  bool encountered(int n, int m, double t) const { return encounters.encountered(n, m, t); }
  bool encounter_holds(int n, int m, double t1, double t2) const {
    return encounters.holds(n, m, t1, t2);
  }
  /// Sorted, de-duplicated capacity and encounter breakpoints in [0, T],
  /// including 0 and T.
  std::vector<double> breakpoints() const;
  void validate() const;

  bool operator==(const NetworkTrace&) const = default;
};

struct SessionLogRecord {
  std::int64_t user_id = 0;
  std::string hotspot_id;
  double login_time = 0.0;
  double logout_time = 0.0;
  double in_bytes = 0.0;
  double out_bytes = 0.0;
};

struct ViewingLogRecord {
  std::int64_t user_id = 0;
  std::string video_id;
  int seg_index = 0;
  double seg_length = 0.0;
  double bitrate = 0.0;
  double download_time = 0.0;
};

/// Two users are encountered while their sessions overlap at the same
/// hotspot. Users are mapped to dense indices in ascending id order; the
/// mapping is returned alongside.
struct SessionEncounters {
  std::vector<std::int64_t> user_ids;
  EncounterTrace trace;
};
SessionEncounters encounters_from_sessions(const std::vector<SessionLogRecord>& records,
                                           std::optional<double> horizon = std::nullopt);

/// Lays one user's measured segment throughputs end to end; the last value
/// is extended to the horizon.
CapacityTrace capacity_from_viewing_log(const std::vector<ViewingLogRecord>& records,
                                        double horizon);

std::vector<SessionLogRecord> read_sessions_csv(const std::string& path);
std::vector<ViewingLogRecord> read_viewing_csv(const std::string& path);

// ---- synthetic generators -------------------------------------------------

/// Markov-modulated piecewise-constant capacity. Each user draws a mean
/// uniformly from [mean_lo, mean_hi]; the process jumps between
/// `multipliers` (relative to the mean) after exponential hold times.
struct CapacityModel {
  double mean_lo = 0.0;
  double mean_hi = 0.7;
  double mean_hold_s = 5.0;
  std::vector<double> multipliers{0.25, 1.0, 1.75};
  void validate() const;
};

enum class Cooperation { kNone, kFull, kRandom };

/// Alternating exponential ON/OFF per pair when `mode == kRandom`.
struct EncounterModel {
  Cooperation mode = Cooperation::kNone;
  double mean_on_s = 60.0;
  double mean_off_s = 120.0;
  void validate() const;
};

CapacityTrace synth_capacity(std::uint64_t seed, int user, double horizon,
                             const CapacityModel& model);
EncounterTrace synth_encounters(std::uint64_t seed, int users, double horizon,
                                const EncounterModel& model);
NetworkTrace synth_network(std::uint64_t seed, int users, double horizon,
                           const CapacityModel& cap, const EncounterModel& enc);

Cooperation parse_cooperation(const std::string& s);
std::string to_string(Cooperation c);

}  // namespace crowdstream
