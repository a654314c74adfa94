#pragma once

// Domain types and the payoff arithmetic shared by the offline bounds, the
// online schedulers and the simulator. Units: seconds, Mbit, Mbps. Utility
// is dimensionless.

#include <span>
#include <vector>

#include "crowdstream/errors.hpp"
#include "crowdstream/traces.hpp"

namespace crowdstream {

/// Feasibility tolerance for time (s) and volume (Mbit) comparisons.
inline constexpr double kFeasTol = 1e-9;

/// Per-user video, QoE, energy and buffer parameters.
struct UserProfile {
  int id = 0;                   // dense index, 0-based
  double beta = 2.0;            // segment length (s)
  double buffer_cap = 40.0;     // Q (s)
  std::vector<double> ladder;   // bitrates (Mbps), strictly increasing
  double theta = 1.0;           // quality-evaluation factor of g
  double phi_qdeg = 1.0;        // loss per Mbps of bitrate decrease
  double phi_rebuf = 1.0;       // loss per second of stall
  double c_time = 0.0;          // cellular, per second of downloading
  double c_data = 0.0;          // cellular, per Mbit
  double w_time = 0.0;          // WiFi, per second (always multiplied by 0)
  double w_data = 0.0;          // WiFi, per Mbit forwarded to another user
  double eps_time = 0.0;        // playback, per second of content
  double eps_rate = 0.0;        // playback, per Mbit of content
  bool is_video_user = true;
  int video_segments = 0;       // segments in this user's video (0 for idle helpers)

  int levels() const { return static_cast<int>(ladder.size()); }
  double rate(int level) const { return ladder.at(static_cast<size_t>(level)); }
  double segment_volume(int level) const { return rate(level) * beta; }

  /// Throws ConfigError on a broken invariant.
  void validate() const;
};

/// One downloaded segment. `level` is a 0-based index into the owner's ladder.
///
/// `t_recv` is the time the owner appends the segment to its playback buffer.
/// It equals `t_end` for every segment produced by an online scheduler; the
/// offline machinery may hold a finished segment until a later instant.
/// `volume` is the data actually transferred (Mbit): the full `rate * beta`
/// for completed transfers, less for aborted or truncated ones.
struct SegmentRecord {
  int downloader = 0;
  int owner = 0;
  int level = 0;
  double rate = 0.0;
  int seg_index = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double t_recv = 0.0;
  double volume = 0.0;
  bool delivered = true;
};

using DownloadSequence = std::vector<SegmentRecord>;
using ReceivingSequence = std::vector<SegmentRecord>;

/// Builds a complete, delivered record received at `t_end`.
SegmentRecord make_record(std::span<const UserProfile> profiles, int downloader,
                          int owner, int level, int seg_index, double t_start,
                          double t_end);

struct BufferState {
  double level = 0.0;
  double last_event_time = 0.0;
  double last_rate = -1.0;  // < 0 until the first segment arrives
  bool has_rate() const { return last_rate >= 0.0; }
};

struct WelfareBreakdown {
  double value = 0.0;
  double qdeg_loss = 0.0;
  double rebuf_loss = 0.0;
  double cell_energy = 0.0;
  double wifi_energy = 0.0;
  double play_energy = 0.0;
  double payoff = 0.0;
  double rebuffer_seconds = 0.0;

  double compose() const {
    return value - qdeg_loss - rebuf_loss - cell_energy - wifi_energy - play_energy;
  }
};

struct RebufResult {
  double loss = 0.0;
  double seconds = 0.0;
};

struct WelfareResult {
  double welfare = 0.0;
  std::vector<WelfareBreakdown> users;
};

/// g(r) = ln(1 + theta * r).
double quality_value(const UserProfile& profile, double rate);

double eval_value(const UserProfile& profile, std::span<const SegmentRecord> received);
double eval_qdeg_loss(const UserProfile& profile, std::span<const SegmentRecord> received);

/// [prev_q - gap]^+ + beta.
double update_buffer(double prev_q, double gap, double beta);

/// Stall between consecutive receptions; the startup wait before the first
/// segment and the tail after the last one are not counted.
RebufResult eval_rebuf_loss(const UserProfile& profile,
                            std::span<const SegmentRecord> received);

/// Buffer level right after each reception (same length as `received`).
std::vector<double> buffer_trajectory(const UserProfile& profile,
                                      std::span<const SegmentRecord> received);

double eval_cell_energy(const UserProfile& profile, std::span<const SegmentRecord> downloads);
double eval_wifi_energy(const UserProfile& profile, std::span<const SegmentRecord> downloads);
double eval_play_energy(const UserProfile& profile, std::span<const SegmentRecord> received);

/// Records downloaded by `downloader`, ordered by start time.
DownloadSequence download_sequence(std::span<const SegmentRecord> all, int downloader);

/// Delivered records owned by `owner`, in playback order (seg_index).
ReceivingSequence receiving_sequence(std::span<const SegmentRecord> all, int owner);

/// Sum of per-user payoffs. Throws IntegrityError on a duplicate delivered
/// (owner, seg_index).
WelfareResult eval_social_welfare(std::span<const UserProfile> profiles,
                                  std::span<const SegmentRecord> all);

/// Checks C.1 (sequential downloads), C.2 (capacity), C.3 (encounter) per
/// downloader and C.4 (buffer bounds) plus playback ordering per owner.
/// Undelivered records are checked for C.1 only. Empty iff feasible.
std::vector<Violation> validate_sequences(std::span<const UserProfile> profiles,
                                          const NetworkTrace& trace,
                                          std::span<const SegmentRecord> all);

}  // namespace crowdstream
