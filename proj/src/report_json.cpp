#include "crowdstream/report_json.hpp"

namespace crowdstream {

Json scheduler_to_json(const SchedulerParams& p) {
  return {{"name", p.name},           {"lambda", p.lambda},     {"delta_th", p.delta_th},
          {"Delta_th", p.Delta_th},   {"reservoir", p.reservoir}, {"window", p.window},
          {"default_wait", p.default_wait}};
}

SchedulerParams scheduler_from_json(const Json& j, SchedulerParams p) {
  try {
    if (j.contains("name")) p.name = j.at("name").get<std::string>();
    if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
    if (j.contains("delta_th")) p.delta_th = j.at("delta_th").get<double>();
    if (j.contains("Delta_th")) p.Delta_th = j.at("Delta_th").get<double>();
    if (j.contains("reservoir")) p.reservoir = j.at("reservoir").get<double>();
    if (j.contains("window")) p.window = j.at("window").get<int>();
    if (j.contains("default_wait")) p.default_wait = j.at("default_wait").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("scheduler: ") + ex.what());
  }
  return p;
}

Json sim_report_to_json(const SimReport& rep, bool records) {
  Json users = Json::array();
  for (size_t n = 0; n < rep.users.size(); ++n) {
    auto u = breakdown_to_json(rep.users[n]);
    u["user"] = n;
    u["avg_bitrate_mbps"] = rep.user_avg_bitrate.at(n);
    users.push_back(u);
  }
  Json inv = {{"buffer_ok", rep.invariants.buffer_ok},
              {"unique_ok", rep.invariants.unique_ok},
              {"capacity_ok", rep.invariants.capacity_ok},
              {"identity_ok", rep.invariants.identity_ok},
              {"failures", rep.invariants.failures}};
  Json j = {{"welfare", rep.welfare},
            {"sw_prime", rep.sw_prime},
            {"avg_bitrate_mbps", rep.avg_bitrate},
            {"rebuffer_s", rep.rebuffer_s},
            {"delivered", rep.delivered},
            {"drops", rep.drops},
            {"aborts", rep.aborts},
            {"truncated", rep.truncated},
            {"decisions", rep.decisions},
            {"waits", rep.waits},
            {"events", rep.events},
            {"users", users},
            {"invariants", inv}};
  if (records) {
    Json rs = Json::array();
    for (const auto& r : rep.records) rs.push_back(record_to_json(r));
    j["records"] = rs;
  }
  return j;
}

namespace {

Json stats_to_json(const SolverStats& s) {
  return {{"nodes", s.nodes},
          {"states", s.states},
          {"lp_iterations", s.lp_iterations},
          {"lp_rows", s.lp_rows},
          {"lp_cols", s.lp_cols}};
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json certificate_to_json(const BoundCertificate& cert) {
  return {{"lower", opt(cert.lower)},
          {"middle", opt(cert.middle)},
          {"upper", cert.upper},
          {"lower_half_beta", opt(cert.lower_half)},
          {"prop1_ok", cert.prop1_ok},
          {"chain_ok", cert.chain_ok},
          {"partial", cert.partial},
          {"solver_stats",
           {{"lower", stats_to_json(cert.lower_stats)},
            {"middle", stats_to_json(cert.middle_stats)},
            {"upper", stats_to_json(cert.upper_stats)}}}};
}

Json instance_to_json(const SlottedInstance& inst) {
  Json profiles = Json::array();
  for (const auto& p : inst.profiles) profiles.push_back(profile_to_json(p));
  Json j = {{"slot_length", inst.slot_length},
            {"slots", inst.slots},
            {"profiles", profiles},
            {"capacity", inst.capacity},
            {"budget", inst.budget}};
  Json meet = Json::array();
  for (int a = 0; a < inst.users(); ++a)
    for (int b = a + 1; b < inst.users(); ++b) {
      std::vector<int> flags;
      for (int s = 0; s < inst.slots; ++s) flags.push_back(inst.encountered(a, b, s) ? 1 : 0);
      meet.push_back({{"a", a}, {"b", b}, {"slots", flags}});
    }
  j["meet"] = meet;
  if (inst.source) j["trace"] = trace_to_json(*inst.source);
  return j;
}

SlottedInstance instance_from_json(const Json& j) {
  try {
    std::vector<UserProfile> profiles;
    UserProfile defaults;
    defaults.ladder = {0.2, 0.4, 0.7, 1.3, 2.3};
    if (j.contains("defaults")) defaults = profile_from_json(j.at("defaults"), defaults);
    int id = 0;
    for (const auto& pj : j.at("profiles")) {
      auto p = profile_from_json(pj, defaults);
      p.id = id++;
      profiles.push_back(p);
    }
    const double L = j.at("slot_length").get<double>();
    if (j.contains("trace")) {
      auto inst = project_slotted(profiles, trace_from_json(j.at("trace")), L);
      if (j.contains("budget")) inst.budget = j.at("budget").get<std::vector<int>>();
      inst.validate();
      return inst;
    }
    SlottedInstance inst;
    inst.profiles = profiles;
    inst.slot_length = L;
    inst.capacity = j.at("capacity").get<std::vector<std::vector<double>>>();
    inst.slots = inst.capacity.empty() ? 0 : static_cast<int>(inst.capacity.front().size());
    const size_t n = profiles.size();
    inst.meet.assign(n, std::vector<std::vector<char>>(n, std::vector<char>(static_cast<size_t>(inst.slots), 0)));
    if (j.contains("meet"))
      for (const auto& e : j.at("meet")) {
        const auto a = e.at("a").get<size_t>(), b = e.at("b").get<size_t>();
        const auto flags = e.at("slots").get<std::vector<int>>();
        if (a >= n || b >= n || flags.size() != static_cast<size_t>(inst.slots))
          throw ConfigError("instance: bad encounter entry");
        for (size_t s = 0; s < flags.size(); ++s)
          inst.meet[a][b][s] = inst.meet[b][a][s] = flags[s] ? 1 : 0;
      }
    if (j.contains("budget")) {
      inst.budget = j.at("budget").get<std::vector<int>>();
    } else {
      for (const auto& p : profiles) inst.budget.push_back(segment_budget(p));
    }
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("instance: ") + ex.what());
  }
}

}  // namespace crowdstream
