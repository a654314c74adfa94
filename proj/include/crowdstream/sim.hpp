#pragma once

// Discrete-event execution of the segmented system under an online
// scheduler or a fixed download script.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowdstream/model.hpp"
#include "crowdstream/online.hpp"
#include "crowdstream/traces.hpp"

namespace crowdstream {

enum class AbortPolicy { kAbort, kComplete };
AbortPolicy parse_abort_policy(const std::string& s);
std::string to_string(AbortPolicy p);

/// One planned transfer: started no earlier than `t_start`, appended to the
/// owner's buffer no earlier than `t_recv`.
struct ScriptItem {
  int downloader = 0;
  int owner = 0;
  int level = 0;
  double t_start = 0.0;
  double t_recv = 0.0;
};

struct SimConfig {
  std::vector<UserProfile> profiles;
  NetworkTrace trace;
  double horizon = 0.0;  // <= trace.horizon; 0 means the trace horizon
  SchedulerParams scheduler;
  std::uint64_t seed = 0;
  AbortPolicy abort_policy = AbortPolicy::kAbort;
  std::optional<std::vector<ScriptItem>> script;

  void validate() const;
};

struct InvariantReport {
  bool buffer_ok = true;
  bool unique_ok = true;
  bool capacity_ok = true;
  bool identity_ok = true;
  std::vector<std::string> failures;
  bool ok() const { return buffer_ok && unique_ok && capacity_ok && identity_ok; }
};

struct SimReport {
  double welfare = 0.0;        // realized, summed per-user payoffs
  double sw_prime = 0.0;       // sum of decision-time payoffs of started downloads
  std::vector<WelfareBreakdown> users;
  double avg_bitrate = 0.0;    // over all delivered segments
  std::vector<double> user_avg_bitrate;
  double rebuffer_s = 0.0;
  int delivered = 0;
  int drops = 0;
  int aborts = 0;
  int truncated = 0;
  int decisions = 0;
  int waits = 0;
  int events = 0;
  std::vector<SegmentRecord> records;
  InvariantReport invariants;
};

/// Smallest end time with the requested volume transferred; nullopt when
/// the horizon comes first.
std::optional<double> compute_download_end(const NetworkTrace& trace, int n, double t_start,
                                           double volume);

SimReport run_simulation(const SimConfig& config);

/// (upper - welfare) / max(|upper|, 1e-12).
double gap_vs_upper_bound(double welfare, double upper);

/// Script that replays `records` (downloads start at t_start, owners take
/// them at t_recv).
std::vector<ScriptItem> script_from_records(const std::vector<SegmentRecord>& records);

}  // namespace crowdstream
