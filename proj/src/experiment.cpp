#include "crowdstream/experiment.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "crowdstream/offline.hpp"
#include "crowdstream/report_json.hpp"

namespace crowdstream {

UserProfile default_profile() {
  UserProfile p;
  p.beta = 2.0;
  p.buffer_cap = 40.0;
  p.ladder = {0.2, 0.4, 0.7, 1.3, 2.3};
  p.theta = 1.0;
  p.phi_qdeg = 0.5;
  p.phi_rebuf = 1.0;
  p.c_time = 0.02;
  p.c_data = 0.02;
  p.w_data = 0.01;
  p.video_segments = 250;
  return p;
}

namespace {

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

/// Scalars are accepted wherever a list is expected.
template <typename T>
void read_list(const Json& j, const char* key, std::vector<T>& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  out = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const Json& j) {
  ExperimentSpec s;
  try {
    read(j, "scenario", s.scenario);
    if (s.scenario == "multi") s.users = 10;
    read(j, "users", s.users);
    read(j, "video_fraction", s.video_fraction);
    read(j, "horizon", s.horizon);
    read(j, "slot_length", s.slot_length);
    if (j.contains("profile")) s.profile = profile_from_json(j.at("profile"), s.profile);
    if (!j.contains("profile") || !j.at("profile").contains("video_segments"))
      s.profile.video_segments = static_cast<int>(std::floor(s.horizon / s.profile.beta + 1e-9));
    if (j.contains("capacity_range")) {
      const auto r = j.at("capacity_range").get<std::vector<double>>();
      if (r.size() != 2) throw ConfigError("capacity_range must be [lo, hi]");
      s.capacity.mean_lo = r[0];
      s.capacity.mean_hi = r[1];
    }
    if (j.contains("capacity_model")) {
      const auto& c = j.at("capacity_model");
      read(c, "mean_hold_s", s.capacity.mean_hold_s);
      read(c, "multipliers", s.capacity.multipliers);
    }
    if (j.contains("encounter_model")) {
      const auto& e = j.at("encounter_model");
      read(e, "mean_on_s", s.encounters.mean_on_s);
      read(e, "mean_off_s", s.encounters.mean_off_s);
    }
    read_list(j, "cooperation", s.cooperation);
    read(j, "trace_file", s.trace_file);
    read_list(j, "schedulers", s.schedulers);
    read_list(j, "lambda", s.lambdas);
    read_list(j, "delta_th", s.delta_ths);
    read_list(j, "Delta_th", s.Delta_ths);
    if (j.contains("scheduler")) s.scheduler_defaults = scheduler_from_json(j.at("scheduler"));
    if (j.contains("seeds")) {
      const auto& v = j.at("seeds");
      if (v.is_object()) {
        const auto first = v.value("first", std::uint64_t{1});
        const auto count = v.at("count").get<std::uint64_t>();
        s.seeds.clear();
        for (std::uint64_t i = 0; i < count; ++i) s.seeds.push_back(first + i);
      } else {
        read_list(j, "seeds", s.seeds);
      }
    }
    if (j.contains("abort_policy")) s.abort_policy = parse_abort_policy(j.at("abort_policy").get<std::string>());
    if (j.contains("compute_gap")) s.compute_gap = j.at("compute_gap").get<bool>();
    read(j, "out", s.out_dir);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("spec: ") + ex.what());
  }
  s.validate();
  return s;
}

Json ExperimentSpec::to_json() const {
  Json j = {{"scenario", scenario},
            {"users", users},
            {"video_fraction", video_fraction},
            {"horizon", horizon},
            {"slot_length", slot_length},
            {"profile", profile_to_json(profile)},
            {"capacity_range", {capacity.mean_lo, capacity.mean_hi}},
            {"capacity_model", {{"mean_hold_s", capacity.mean_hold_s}, {"multipliers", capacity.multipliers}}},
            {"encounter_model", {{"mean_on_s", encounters.mean_on_s}, {"mean_off_s", encounters.mean_off_s}}},
            {"cooperation", cooperation},
            {"trace_file", trace_file},
            {"schedulers", schedulers},
            {"lambda", lambdas},
            {"delta_th", delta_ths},
            {"Delta_th", Delta_ths},
            {"scheduler", scheduler_to_json(scheduler_defaults)},
            {"seeds", seeds},
            {"abort_policy", to_string(abort_policy)},
            {"compute_gap", gap_enabled()},
            {"out", out_dir}};
  return j;
}

void ExperimentSpec::validate() const {
  if (scenario != "single" && scenario != "multi") throw ConfigError("scenario must be single or multi");
  if (users < 1) throw ConfigError("users must be positive");
  if (scenario == "single" && users != 1) throw ConfigError("the single scenario has one user");
  if (!(video_fraction >= 0.0 && video_fraction <= 1.0)) throw ConfigError("video_fraction must lie in [0, 1]");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (!(slot_length > 0.0)) throw ConfigError("slot_length must be positive");
  profile.validate();
  capacity.validate();
  if (cooperation.empty()) throw ConfigError("cooperation list is empty");
  for (const auto& c : cooperation) parse_cooperation(c);
  if (schedulers.empty()) throw ConfigError("scheduler list is empty");
  if (lambdas.empty() || delta_ths.empty() || Delta_ths.empty() || seeds.empty())
    throw ConfigError("sweep axes must be nonempty");
  for (const auto& name : schedulers) {
    auto p = scheduler_defaults;
    p.name = name;
    p.validate();
  }
  for (double l : lambdas)
    if (!(l >= 0.0)) throw ConfigError("lambda must be nonnegative");
}

std::string Cell::name() const {
  std::ostringstream s;
  s << scheduler.name << "_l" << fmt(scheduler.lambda) << "_d" << fmt(scheduler.delta_th) << "_D"
    << fmt(scheduler.Delta_th) << "_" << cooperation << "_s" << seed;
  return s.str();
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (const auto& name : spec.schedulers) {
    std::vector<SchedulerParams> points;
    if (name == "lyapunov") {
      for (double l : spec.lambdas) {
        auto p = spec.scheduler_defaults;
        p.name = name;
        p.lambda = l;
        points.push_back(p);
      }
    } else {
      for (double d : spec.delta_ths)
        for (double D : spec.Delta_ths) {
          auto p = spec.scheduler_defaults;
          p.name = name;
          p.delta_th = d;
          p.Delta_th = D;
          points.push_back(p);
        }
    }
    for (const auto& p : points)
      for (const auto& coop : spec.cooperation)
        for (auto seed : spec.seeds) cells.push_back({p, coop, seed});
  }
  return cells;
}

std::vector<UserProfile> build_profiles(const ExperimentSpec& spec) {
  const int video = static_cast<int>(std::lround(spec.video_fraction * spec.users));
  std::vector<UserProfile> out;
  for (int n = 0; n < spec.users; ++n) {
    auto p = spec.profile;
    p.id = n;
    p.is_video_user = n < video;
    if (!p.is_video_user) p.video_segments = 0;
    out.push_back(p);
  }
  return out;
}

NetworkTrace build_trace(const ExperimentSpec& spec, const std::string& cooperation,
                         std::uint64_t seed) {
  const auto mode = parse_cooperation(cooperation);
  if (mode == Cooperation::kRandom && !spec.trace_file.empty()) {
    auto tr = trace_from_json(read_json_file(spec.trace_file));
    if (tr.users() != spec.users) throw ConfigError("trace_file user count differs from spec");
    return tr;
  }
  auto enc = spec.encounters;
  enc.mode = mode;
  return synth_network(seed, spec.users, spec.horizon, spec.capacity, enc);
}

SimConfig build_config(const ExperimentSpec& spec, const Cell& cell) {
  SimConfig cfg;
  cfg.profiles = build_profiles(spec);
  cfg.trace = build_trace(spec, cell.cooperation, cell.seed);
  cfg.horizon = std::min(spec.horizon, cfg.trace.horizon);
  cfg.scheduler = cell.scheduler;
  cfg.seed = cell.seed;
  cfg.abort_policy = spec.abort_policy;
  return cfg;
}

namespace {

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& body) {
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) body(i);
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<CellResult> run_matrix(const ExperimentSpec& spec, int jobs) {
  spec.validate();
  const auto cells = expand_cells(spec);

  std::map<std::pair<std::string, std::uint64_t>, std::optional<double>> bounds;
  if (spec.gap_enabled())
    for (const auto& c : cells) bounds[{c.cooperation, c.seed}] = std::nullopt;
  std::vector<std::pair<std::string, std::uint64_t>> keys;
  for (const auto& [k, v] : bounds) keys.push_back(k);
  std::vector<std::optional<double>> upper(keys.size());
  parallel_for(keys.size(), jobs, [&](size_t i) {
    try {
      const auto inst = project_slotted(build_profiles(spec),
                                        build_trace(spec, keys[i].first, keys[i].second),
                                        spec.slot_length);
      upper[i] = solve_slotted_relaxed(inst).bound;
    } catch (const ResourceError&) {
    }
  });
  for (size_t i = 0; i < keys.size(); ++i) bounds[keys[i]] = upper[i];

  std::vector<CellResult> results(cells.size());
  parallel_for(cells.size(), jobs, [&](size_t i) {
    auto& r = results[i];
    r.cell = cells[i];
    try {
      r.report = run_simulation(build_config(spec, cells[i]));
      if (auto it = bounds.find({cells[i].cooperation, cells[i].seed}); it != bounds.end() && it->second) {
        r.upper = it->second;
        r.gap = gap_vs_upper_bound(r.report->welfare, *r.upper);
        r.gap_sw_prime = gap_vs_upper_bound(r.report->sw_prime, *r.upper);
      }
    } catch (const std::exception& ex) {
      r.error = ex.what();
    }
  });

  // Cooperation gain of each "full" cell over its "none" twin.
  for (auto& r : results) {
    if (r.cell.cooperation != "full" || !r.report) continue;
    for (const auto& o : results) {
      if (o.cell.cooperation != "none" || !o.report || o.cell.seed != r.cell.seed ||
          o.cell.scheduler.name != r.cell.scheduler.name || o.cell.scheduler.lambda != r.cell.scheduler.lambda ||
          o.cell.scheduler.delta_th != r.cell.scheduler.delta_th ||
          o.cell.scheduler.Delta_th != r.cell.scheduler.Delta_th)
        continue;
      if (o.report->avg_bitrate > 0.0)
        r.coop_gain = (r.report->avg_bitrate - o.report->avg_bitrate) / o.report->avg_bitrate;
    }
  }
  return results;
}

std::string summary_csv(const std::vector<CellResult>& results) {
  std::ostringstream s;
  s.precision(12);
  s << "scheduler,seed,lambda,avg_bitrate_mbps,welfare,rebuffer_s,gap,"
       "cooperation,delta_th,Delta_th,sw_prime,gap_sw_prime,upper,coop_gain,drops,aborts,error\n";
  auto opt = [&](const std::optional<double>& v) {
    if (v) s << *v;
  };
  for (const auto& r : results) {
    s << r.cell.scheduler.name << ',' << r.cell.seed << ',' << r.cell.scheduler.lambda << ',';
    if (r.report) s << r.report->avg_bitrate << ',' << r.report->welfare << ',' << r.report->rebuffer_s;
    else s << ",,";
    s << ',';
    opt(r.gap);
    s << ',' << r.cell.cooperation << ',' << r.cell.scheduler.delta_th << ','
      << r.cell.scheduler.Delta_th << ',';
    if (r.report) s << r.report->sw_prime;
    s << ',';
    opt(r.gap_sw_prime);
    s << ',';
    opt(r.upper);
    s << ',';
    opt(r.coop_gain);
    s << ',';
    if (r.report) s << r.report->drops << ',' << r.report->aborts;
    else s << ',';
    std::string err = r.error;
    for (auto& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    s << ',' << err << '\n';
  }
  return s.str();
}

void write_outputs(const ExperimentSpec& spec, const std::vector<CellResult>& results,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_text_atomic((fs::path(out_dir) / "spec.json").string(), spec.to_json().dump(2) + "\n");
  for (const auto& r : results) {
    Json j = {{"cell", r.cell.name()},
              {"scheduler", scheduler_to_json(r.cell.scheduler)},
              {"cooperation", r.cell.cooperation},
              {"seed", r.cell.seed},
              {"spec", spec.to_json()}};
    if (r.report) j["report"] = sim_report_to_json(*r.report);
    j["upper"] = r.upper ? Json(*r.upper) : Json(nullptr);
    j["gap"] = r.gap ? Json(*r.gap) : Json(nullptr);
    j["gap_sw_prime"] = r.gap_sw_prime ? Json(*r.gap_sw_prime) : Json(nullptr);
    j["coop_gain"] = r.coop_gain ? Json(*r.coop_gain) : Json(nullptr);
    if (!r.error.empty()) j["error"] = r.error;
    write_text_atomic((fs::path(out_dir) / "cells" / r.cell.name() / "report.json").string(),
                      j.dump(2) + "\n");
  }
  write_text_atomic((fs::path(out_dir) / "summary.csv").string(), summary_csv(results));
}

}  // namespace crowdstream
