#pragma once

// Run matrices: expand an experiment spec into cells (scheduler, parameter
// point, cooperation mode, seed), simulate them in a worker pool and write
// per-cell reports plus summary.csv.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowdstream/json_io.hpp"
#include "crowdstream/sim.hpp"

namespace crowdstream {

/// Desk-scale defaults: ladder {0.2, 0.4, 0.7, 1.3, 2.3} Mbps, 2 s segments,
/// 40 s buffer, 250 segments.
UserProfile default_profile();

struct ExperimentSpec {
  std::string scenario = "single";           // "single" | "multi"
  int users = 1;
  double video_fraction = 1.0;
  double horizon = 500.0;
  double slot_length = 10.0;
  UserProfile profile = default_profile();   // template for every user
  CapacityModel capacity{0.7, 5.0};
  EncounterModel encounters;                 // mode is overridden per cell
  std::vector<std::string> cooperation{"none"};
  std::string trace_file;                    // used by cooperation "trace" when set
  std::vector<std::string> schedulers{"lyapunov", "buffer", "prediction"};
  std::vector<double> lambdas{10.0};
  std::vector<double> delta_ths{0.5};
  std::vector<double> Delta_ths{10.0};
  SchedulerParams scheduler_defaults;
  std::vector<std::uint64_t> seeds{1};
  AbortPolicy abort_policy = AbortPolicy::kAbort;
  std::optional<bool> compute_gap;           // default: only for one user
  std::string out_dir = "out";

  /// Throws ConfigError on unknown keys' values or broken invariants.
  static ExperimentSpec from_json(const Json& j);
  Json to_json() const;
  void validate() const;
  bool gap_enabled() const { return compute_gap.value_or(users == 1); }
};

struct Cell {
  SchedulerParams scheduler;
  std::string cooperation;
  std::uint64_t seed = 0;
  std::string name() const;
};

struct CellResult {
  Cell cell;
  std::optional<SimReport> report;
  std::optional<double> upper;
  std::optional<double> gap;
  std::optional<double> gap_sw_prime;
  std::optional<double> coop_gain;
  std::string error;
};

std::vector<Cell> expand_cells(const ExperimentSpec& spec);
std::vector<UserProfile> build_profiles(const ExperimentSpec& spec);
NetworkTrace build_trace(const ExperimentSpec& spec, const std::string& cooperation,
                         std::uint64_t seed);
SimConfig build_config(const ExperimentSpec& spec, const Cell& cell);

/// Runs every cell with up to `jobs` threads; results keep cell order.
std::vector<CellResult> run_matrix(const ExperimentSpec& spec, int jobs = 1);

std::string summary_csv(const std::vector<CellResult>& results);
/// Writes <out>/spec.json, <out>/cells/<cell>/report.json and <out>/summary.csv.
void write_outputs(const ExperimentSpec& spec, const std::vector<CellResult>& results,
                   const std::string& out_dir);

}  // namespace crowdstream
