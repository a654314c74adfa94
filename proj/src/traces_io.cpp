#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crowdstream/json_io.hpp"

namespace crowdstream {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }
  return out;
}

template <typename T>
T parse_num(const std::string& s, const std::string& file, int line, const char* column) {
  T value{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || s.empty())
    throw ParseError(file, line, std::string("bad value for ") + column + ": '" + s + "'");
  return value;
}

/// Reads a CSV with an exact header; calls `row` with the fields and line number.
template <typename F>
void read_csv(const std::string& path, const std::vector<std::string>& header, F&& row) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
  ++lineno;
  if (split_csv(line) != header) {
    std::string expect;
    for (const auto& h : header) expect += (expect.empty() ? "" : ",") + h;
    throw ParseError(path, lineno, "header must be '" + expect + "'");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError(path, lineno, "expected " + std::to_string(header.size()) + " columns");
    row(fields, lineno);
  }
}

}  // namespace

std::vector<SessionLogRecord> read_sessions_csv(const std::string& path) {
  std::vector<SessionLogRecord> out;
  read_csv(path, {"user_id", "hotspot_id", "login_s", "logout_s", "in_bytes", "out_bytes"},
           [&](const std::vector<std::string>& f, int line) {
             SessionLogRecord r;
             r.user_id = parse_num<std::int64_t>(f[0], path, line, "user_id");
             r.hotspot_id = f[1];
             r.login_time = parse_num<double>(f[2], path, line, "login_s");
             r.logout_time = parse_num<double>(f[3], path, line, "logout_s");
             r.in_bytes = parse_num<double>(f[4], path, line, "in_bytes");
             r.out_bytes = parse_num<double>(f[5], path, line, "out_bytes");
             if (r.login_time > r.logout_time) throw ParseError(path, line, "login after logout");
             if (r.hotspot_id.empty()) throw ParseError(path, line, "empty hotspot_id");
             out.push_back(std::move(r));
           });
  return out;
}

std::vector<ViewingLogRecord> read_viewing_csv(const std::string& path) {
  std::vector<ViewingLogRecord> out;
  read_csv(path, {"user_id", "video_id", "seg_index", "seg_len_s", "bitrate_mbps", "download_s"},
           [&](const std::vector<std::string>& f, int line) {
             ViewingLogRecord r;
             r.user_id = parse_num<std::int64_t>(f[0], path, line, "user_id");
             r.video_id = f[1];
             r.seg_index = parse_num<int>(f[2], path, line, "seg_index");
             r.seg_length = parse_num<double>(f[3], path, line, "seg_len_s");
             r.bitrate = parse_num<double>(f[4], path, line, "bitrate_mbps");
             r.download_time = parse_num<double>(f[5], path, line, "download_s");
             if (!(r.download_time > 0.0)) throw ParseError(path, line, "nonpositive download_s");
             if (!(r.seg_length > 0.0) || !(r.bitrate > 0.0))
               throw ParseError(path, line, "nonpositive seg_len_s or bitrate_mbps");
             out.push_back(std::move(r));
           });
  return out;
}

Json trace_to_json(const NetworkTrace& trace) {
  Json j;
  j["horizon"] = trace.horizon;
  Json caps = Json::array();
  for (int n = 0; n < trace.users(); ++n) {
    const auto& c = trace.capacity[static_cast<size_t>(n)];
    caps.push_back({{"user", n}, {"times", c.times()}, {"rates", c.rates()}});
  }
  j["capacity"] = caps;
  Json enc = Json::array();
  for (const auto& [pair, list] : trace.encounters.pairs()) {
    Json ivs = Json::array();
    for (const auto& iv : list) ivs.push_back({iv.start, iv.end});
    enc.push_back({{"a", pair.first}, {"b", pair.second}, {"intervals", ivs}});
  }
  j["encounters"] = enc;
  return j;
}

NetworkTrace trace_from_json(const Json& j) {
  try {
    NetworkTrace tr;
    tr.horizon = j.at("horizon").get<double>();
    const auto& caps = j.at("capacity");
    tr.capacity.resize(caps.size());
    for (const auto& c : caps) {
      const auto n = c.at("user").get<size_t>();
      if (n >= caps.size()) throw ConfigError("trace.json: capacity user index out of range");
      tr.capacity[n] = CapacityTrace(c.at("times").get<std::vector<double>>(),
                                     c.at("rates").get<std::vector<double>>(), tr.horizon);
    }
    tr.encounters = EncounterTrace(static_cast<int>(caps.size()), tr.horizon);
    if (j.contains("encounters"))
      for (const auto& e : j.at("encounters"))
        for (const auto& iv : e.at("intervals"))
          tr.encounters.add(e.at("a").get<int>(), e.at("b").get<int>(),
                            {iv.at(0).get<double>(), iv.at(1).get<double>()});
    tr.validate();
    return tr;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("trace.json: ") + ex.what());
  }
}

Json profile_to_json(const UserProfile& p) {
  return {{"id", p.id},
          {"beta", p.beta},
          {"buffer_cap", p.buffer_cap},
          {"ladder", p.ladder},
          {"theta", p.theta},
          {"phi_qdeg", p.phi_qdeg},
          {"phi_rebuf", p.phi_rebuf},
          {"c_time", p.c_time},
          {"c_data", p.c_data},
          {"w_time", p.w_time},
          {"w_data", p.w_data},
          {"eps_time", p.eps_time},
          {"eps_rate", p.eps_rate},
          {"is_video_user", p.is_video_user},
          {"video_segments", p.video_segments}};
}

UserProfile profile_from_json(const Json& j, UserProfile p) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    get("id", p.id);
    get("beta", p.beta);
    get("buffer_cap", p.buffer_cap);
    get("ladder", p.ladder);
    get("theta", p.theta);
    get("phi_qdeg", p.phi_qdeg);
    get("phi_rebuf", p.phi_rebuf);
    get("c_time", p.c_time);
    get("c_data", p.c_data);
    get("w_time", p.w_time);
    get("w_data", p.w_data);
    get("eps_time", p.eps_time);
    get("eps_rate", p.eps_rate);
    get("is_video_user", p.is_video_user);
    get("video_segments", p.video_segments);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("profile: ") + ex.what());
  }
  return p;
}

Json breakdown_to_json(const WelfareBreakdown& b) {
  return {{"value", b.value},
          {"qdeg_loss", b.qdeg_loss},
          {"rebuf_loss", b.rebuf_loss},
          {"cell_energy", b.cell_energy},
          {"wifi_energy", b.wifi_energy},
          {"play_energy", b.play_energy},
          {"payoff", b.payoff},
          {"rebuffer_s", b.rebuffer_seconds}};
}

Json record_to_json(const SegmentRecord& r) {
  return {{"downloader", r.downloader}, {"owner", r.owner},   {"level", r.level},
          {"rate", r.rate},             {"seg_index", r.seg_index}, {"t_start", r.t_start},
          {"t_end", r.t_end},           {"t_recv", r.t_recv}, {"volume", r.volume},
          {"delivered", r.delivered}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError(path + ": " + ex.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, target);
}

}  // namespace crowdstream
