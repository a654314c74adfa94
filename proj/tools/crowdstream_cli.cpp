#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "crowdstream/experiment.hpp"
#include "crowdstream/offline.hpp"
#include "crowdstream/report_json.hpp"

using namespace crowdstream;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitPartial = 3;

struct RunArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> schedulers;
  std::vector<double> lambdas;
  int jobs = 1;
};

int cmd_run(const RunArgs& a) {
  auto j = read_json_file(a.spec);
  if (a.seed) j["seeds"] = Json::array({*a.seed});
  if (!a.schedulers.empty()) j["schedulers"] = a.schedulers;
  if (!a.lambdas.empty()) j["lambda"] = a.lambdas;
  auto spec = ExperimentSpec::from_json(j);
  if (!a.out.empty()) spec.out_dir = a.out;
  const auto results = run_matrix(spec, a.jobs);
  write_outputs(spec, results, spec.out_dir);
  int failed = 0;
  for (const auto& r : results)
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "cell " << r.cell.name() << ": " << r.error << "\n";
    }
  std::cout << results.size() << " cells, " << failed << " failed; wrote " << spec.out_dir
            << "/summary.csv\n";
  return 0;
}

struct BoundsArgs {
  std::string spec;
  std::string out = "bounds.json";
  bool no_middle = false;
  std::uint64_t exact_budget = 10'000'000;
  std::uint64_t brute_budget = 50'000'000;
};

int cmd_bounds(const BoundsArgs& a) {
  const auto inst = instance_from_json(read_json_file(a.spec));
  CertificateOptions opt;
  opt.run_middle = !a.no_middle;
  opt.exact_budget = a.exact_budget;
  opt.brute_budget = a.brute_budget;
  const auto cert = theorem1_certificate(inst, opt);
  auto j = certificate_to_json(cert);
  write_text_atomic(a.out, j.dump(2) + "\n");
  std::cout << j.dump() << "\n";
  return cert.partial ? kExitPartial : 0;
}

struct GenArgs {
  std::string out = "trace.json";
  int users = 1;
  double horizon = 500.0;
  double lo = 0.0, hi = 0.7;
  double hold = 5.0;
  std::string cooperation = "none";
  double on = 60.0, off = 120.0;
  std::uint64_t seed = 1;
};

int cmd_gen(const GenArgs& a) {
  if (a.users < 1) throw ConfigError("users must be positive");
  if (!(a.horizon > 0.0)) throw ConfigError("horizon must be positive");
  CapacityModel cap;
  cap.mean_lo = a.lo;
  cap.mean_hi = a.hi;
  cap.mean_hold_s = a.hold;
  EncounterModel enc;
  enc.mode = parse_cooperation(a.cooperation);
  enc.mean_on_s = a.on;
  enc.mean_off_s = a.off;
  const auto tr = synth_network(a.seed, a.users, a.horizon, cap, enc);
  write_text_atomic(a.out, trace_to_json(tr).dump(2) + "\n");
  return 0;
}

struct IngestArgs {
  std::string sessions;
  std::string viewing;
  std::string out = "trace.json";
  double horizon = 0.0;
  double default_capacity = 0.0;
};

int cmd_ingest(const IngestArgs& a) {
  std::vector<SessionLogRecord> sessions;
  std::vector<ViewingLogRecord> viewing;
  if (!a.sessions.empty()) sessions = read_sessions_csv(a.sessions);
  if (!a.viewing.empty()) viewing = read_viewing_csv(a.viewing);
  if (sessions.empty() && viewing.empty()) throw ConfigError("nothing to ingest");

  std::set<std::int64_t> ids;
  for (const auto& s : sessions) ids.insert(s.user_id);
  for (const auto& v : viewing) ids.insert(v.user_id);
  std::map<std::int64_t, int> index;
  for (auto id : ids) index.emplace(id, static_cast<int>(index.size()));

  double horizon = a.horizon;
  if (horizon <= 0.0) {
    for (const auto& s : sessions) horizon = std::max(horizon, s.logout_time);
    std::map<std::int64_t, double> spent;
    for (const auto& v : viewing) horizon = std::max(horizon, spent[v.user_id] += v.download_time);
  }
  if (!(horizon > 0.0)) throw ConfigError("cannot infer a positive horizon; pass --horizon");

  NetworkTrace tr;
  tr.horizon = horizon;
  for (auto id : ids) {
    std::vector<ViewingLogRecord> mine;
    for (const auto& v : viewing)
      if (v.user_id == id) mine.push_back(v);
    tr.capacity.push_back(mine.empty() ? CapacityTrace::constant(a.default_capacity, horizon)
                                       : capacity_from_viewing_log(mine, horizon));
  }
  tr.encounters = EncounterTrace(static_cast<int>(ids.size()), horizon);
  if (!sessions.empty()) {
    const auto se = encounters_from_sessions(sessions, horizon);
    for (const auto& [pair, list] : se.trace.pairs())
      for (const auto& iv : list)
        tr.encounters.add(index.at(se.user_ids[static_cast<size_t>(pair.first)]),
                          index.at(se.user_ids[static_cast<size_t>(pair.second)]), iv);
  }
  tr.validate();
  auto j = trace_to_json(tr);
  j["user_ids"] = std::vector<std::int64_t>(ids.begin(), ids.end());
  write_text_atomic(a.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdstream: crowdsourced ABR streaming simulator and offline bounds"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate an experiment matrix");
  run_cmd->add_option("--spec", run.spec, "experiment spec (JSON)")->required();
  run_cmd->add_option("--out", run.out, "output directory (overrides the spec)");
  run_cmd->add_option("--seed", run.seed, "run a single seed");
  run_cmd->add_option("--scheduler", run.schedulers, "lyapunov | buffer | prediction");
  run_cmd->add_option("--lambda", run.lambdas, "lambda values for the lyapunov scheduler");
  run_cmd->add_option("--jobs", run.jobs, "worker threads")->check(CLI::PositiveNumber);

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "offline welfare bounds for a small instance");
  bounds_cmd->add_option("--spec", bounds.spec, "instance (JSON)")->required();
  bounds_cmd->add_option("--out", bounds.out, "bounds.json path");
  bounds_cmd->add_flag("--no-middle", bounds.no_middle, "skip the segmented search");
  bounds_cmd->add_option("--exact-budget", bounds.exact_budget, "node budget of the slotted search");
  bounds_cmd->add_option("--brute-budget", bounds.brute_budget, "node budget of the segmented search");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-traces", "synthesize a network trace");
  gen_cmd->add_option("--out", gen.out, "trace.json path");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--users", gen.users, "user count");
  gen_cmd->add_option("--horizon", gen.horizon, "seconds");
  gen_cmd->add_option("--capacity-lo", gen.lo, "lowest per-user mean capacity (Mbps)");
  gen_cmd->add_option("--capacity-hi", gen.hi, "highest per-user mean capacity (Mbps)");
  gen_cmd->add_option("--hold", gen.hold, "mean capacity hold time (s)");
  gen_cmd->add_option("--cooperation", gen.cooperation, "none | full | trace");
  gen_cmd->add_option("--mean-on", gen.on, "mean encounter duration (s)");
  gen_cmd->add_option("--mean-off", gen.off, "mean gap between encounters (s)");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "convert session/viewing logs to trace.json");
  ingest_cmd->add_option("--sessions", ingest.sessions, "sessions.csv");
  ingest_cmd->add_option("--viewing", ingest.viewing, "viewing.csv");
  ingest_cmd->add_option("--out", ingest.out, "trace.json path");
  ingest_cmd->add_option("--horizon", ingest.horizon, "seconds (inferred when omitted)");
  ingest_cmd->add_option("--default-capacity", ingest.default_capacity,
                         "capacity of users without viewing records (Mbps)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*bounds_cmd) return cmd_bounds(bounds);
    if (*gen_cmd) return cmd_gen(gen);
    if (*ingest_cmd) return cmd_ingest(ingest);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
