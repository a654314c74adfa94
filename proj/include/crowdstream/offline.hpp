#pragma once

// Offline machinery: the virtual time-slotted system, its exact optimum, a
// fluid relaxation upper bound, and an exhaustive segmented search for tiny
// instances. Slots are 0-based; slot s covers [s*L, (s+1)*L].

#include <cstdint>
#include <optional>
#include <vector>

#include "crowdstream/model.hpp"
#include "crowdstream/traces.hpp"

namespace crowdstream {

struct SlottedInstance {
  std::vector<UserProfile> profiles;
  double slot_length = 1.0;
  int slots = 0;
  std::vector<std::vector<double>> capacity;         // [n][s], Mbit per slot
  std::vector<std::vector<std::vector<char>>> meet;  // [n][m][s], whole-slot encounter
  std::vector<int> budget;                           // segments per owner
  std::optional<NetworkTrace> source;                // trace the slots were cut from

  int users() const { return static_cast<int>(profiles.size()); }
  bool encountered(int n, int m, int s) const {
    return n == m || meet[static_cast<size_t>(n)][static_cast<size_t>(m)][static_cast<size_t>(s)];
  }
  void validate() const;
};

/// Segment budget of a profile: its video length, or 0 for idle helpers.
int segment_budget(const UserProfile& p);

/// Cuts the trace into floor(T / L) slots.
SlottedInstance project_slotted(std::vector<UserProfile> profiles, const NetworkTrace& trace,
                                double slot_length);

/// Same traces with segment length beta / k and k times the segment budget.
SlottedInstance split_segments(const SlottedInstance& inst, int k);
std::vector<UserProfile> split_segments(std::vector<UserProfile> profiles, int k);

/// The trace behind an instance: the source trace, or a slot-aligned one
/// rebuilt from the per-slot capacity and encounter flags.
NetworkTrace instance_trace(const SlottedInstance& inst);

/// kappa[s][n][m][z]: segments user n downloads for owner m at level z in slot s.
class SlottedSchedule {
 public:
  SlottedSchedule() = default;
  SlottedSchedule(int slots, int users, int levels)
      : slots_(slots), users_(users), levels_(levels),
        k_(static_cast<size_t>(slots) * users * users * levels, 0) {}
  static SlottedSchedule zeros(const SlottedInstance& inst);

  int slots() const { return slots_; }
  int users() const { return users_; }
  int levels() const { return levels_; }
  int& at(int s, int n, int m, int z) { return k_[idx(s, n, m, z)]; }
  int at(int s, int n, int m, int z) const { return k_[idx(s, n, m, z)]; }
  const std::vector<int>& raw() const { return k_; }
  bool operator==(const SlottedSchedule&) const = default;

 private:
  size_t idx(int s, int n, int m, int z) const {
    return ((static_cast<size_t>(s) * users_ + n) * users_ + m) * levels_ + z;
  }
  int slots_ = 0, users_ = 0, levels_ = 0;
  std::vector<int> k_;
};

struct SlottedEval {
  double welfare = 0.0;
  std::vector<WelfareBreakdown> users;
  std::vector<std::vector<double>> buffer;  // [m][s], level at the end of slot s
};

std::vector<Violation> check_slotted_feasibility(const SlottedInstance& inst,
                                                 const SlottedSchedule& k);
/// Throws FeasibilityError when the schedule violates any constraint.
SlottedEval eval_slotted_welfare(const SlottedInstance& inst, const SlottedSchedule& k);

/// Segmented form of a slotted schedule: each downloader fetches its slot's
/// segments back to back from the slot start at capacity rate; owners append
/// them at the slot end in ascending bitrate order.
std::vector<SegmentRecord> embed_schedule(const SlottedInstance& inst, const SlottedSchedule& k);

struct SolverStats {
  std::uint64_t nodes = 0;
  std::uint64_t states = 0;
  long lp_iterations = 0;
  int lp_rows = 0;
  int lp_cols = 0;
};

struct ExactResult {
  SlottedSchedule schedule;
  double welfare = 0.0;
  SolverStats stats;
};

struct ExactLimits {
  std::uint64_t node_budget = 10'000'000;
};

ExactResult solve_slotted_exact(const SlottedInstance& inst, ExactLimits limits = {});

struct RelaxedResult {
  double bound = 0.0;
  SolverStats stats;
};

/// Fluid relaxation over the instance's trace; an upper bound on both the
/// slotted and the segmented optimum.
RelaxedResult solve_slotted_relaxed(const SlottedInstance& inst);

struct BruteForceOptions {
  double slot_length = 0.0;           // adds slot boundaries to the grid when > 0
  std::vector<double> extra_points;   // additional grid points
  std::uint64_t node_budget = 50'000'000;
};

struct BruteForceResult {
  double welfare = 0.0;
  std::vector<SegmentRecord> schedule;
  SolverStats stats;
};

/// Exhaustive search over segmented schedules whose transfers start at grid
/// points or back to back, run at capacity rate, and are appended to the
/// owner's buffer at grid points.
BruteForceResult brute_force_segmented(std::span<const UserProfile> profiles,
                                       const NetworkTrace& trace,
                                       const BruteForceOptions& options = {});

struct BoundCertificate {
  std::optional<double> lower;
  std::optional<double> lower_half;
  std::optional<double> middle;
  double upper = 0.0;
  bool chain_ok = false;
  bool prop1_ok = false;
  bool partial = false;
  SolverStats lower_stats, middle_stats, upper_stats;
};

struct CertificateOptions {
  bool run_middle = true;
  std::uint64_t exact_budget = 10'000'000;
  std::uint64_t brute_budget = 50'000'000;
};

/// Runs all three solvers; budget exhaustion leaves the affected field empty
/// and sets `partial`.
BoundCertificate theorem1_certificate(const SlottedInstance& inst,
                                      const CertificateOptions& options = {});

}  // namespace crowdstream
