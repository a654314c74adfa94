#pragma once

// JSON encodings of traces, profiles and reports. trace.json layout:
//
//   {"horizon": T,
//    "user_ids": [...],                       // optional, external ids
//    "capacity": [{"user": 0, "times": [...], "rates": [...]}, ...],
//    "encounters": [{"a": 0, "b": 1, "intervals": [[s, e], ...]}, ...]}

#include <string>

#include <json.hpp>

#include "crowdstream/model.hpp"
#include "crowdstream/traces.hpp"

namespace crowdstream {

using Json = nlohmann::ordered_json;

Json trace_to_json(const NetworkTrace& trace);
NetworkTrace trace_from_json(const Json& j);

Json profile_to_json(const UserProfile& p);
/// Missing keys keep the values already in `base`.
UserProfile profile_from_json(const Json& j, UserProfile base = {});

Json breakdown_to_json(const WelfareBreakdown& b);
Json record_to_json(const SegmentRecord& r);

Json read_json_file(const std::string& path);
/// Writes via a temporary file and rename so readers never see a partial file.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace crowdstream
