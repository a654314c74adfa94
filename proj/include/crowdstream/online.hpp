#pragma once

// Online download decisions taken by one user at a decision epoch: the
// drift-plus-penalty scheduler and the buffer- and prediction-based
// baselines with the threshold owner-selection policy.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdstream/model.hpp"

namespace crowdstream {

/// Snapshot seen by the deciding user `self` at time `now`.
struct SchedulerState {
  int self = 0;
  double now = 0.0;
  double capacity = 0.0;               // h_self(now), Mbps
  std::vector<char> neighbors;         // e_{self,m}(now); neighbors[self] = 1
  std::vector<double> buffer;          // q_m(now), s
  std::vector<double> last_rate;       // rate of m's last received segment, < 0 if none
  std::vector<int> next_segment;       // lowest free seg_index of m, -1 if none is left
  std::vector<double> throughput;      // self's recent completed-download throughputs
};

enum class DecisionKind { kDownload, kWait };

struct Decision {
  DecisionKind kind = DecisionKind::kWait;
  int owner = -1;
  int level = -1;
  int seg_index = -1;
  double wait = 0.0;
  double payoff = 0.0;  // P(owner, level) of a download, 0 for a wait
};

struct SchedulerParams {
  std::string name = "lyapunov";  // "lyapunov" | "buffer" | "prediction"
  double lambda = 10.0;
  double delta_th = 0.5;
  double Delta_th = 10.0;
  double reservoir = 0.25;        // fraction of Q
  int window = 5;
  double default_wait = 1.0;
  void validate() const;
};

/// A video user that still has a segment nobody has reserved.
bool is_active(std::span<const UserProfile> profiles, const SchedulerState& st, int m);

/// R_u^z * beta_u / h; nullopt when the decider has no capacity.
std::optional<double> estimate_download_time(std::span<const UserProfile> profiles,
                                             const SchedulerState& st, int u, int z);

double decision_payoff(std::span<const UserProfile> profiles, const SchedulerState& st, int u,
                       int z);
double lyapunov_drift(std::span<const UserProfile> profiles, const SchedulerState& st, int u,
                      int z);

Decision lyapunov_decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                         double lambda, double default_wait = 1.0);

double predict_capacity(std::span<const double> history, double current, int window = 5);

/// nullopt when there is nobody the decider can download for.
std::optional<int> select_owner(std::span<const UserProfile> profiles, const SchedulerState& st,
                                double delta_th, double Delta_th);

Decision buffer_based_decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                             const SchedulerParams& params);
Decision prediction_based_decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                                 const SchedulerParams& params);

/// Dispatches on `params.name`.
Decision decide(std::span<const UserProfile> profiles, const SchedulerState& st,
                const SchedulerParams& params);

}  // namespace crowdstream
