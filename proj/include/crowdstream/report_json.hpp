#pragma once

#include "crowdstream/json_io.hpp"
#include "crowdstream/offline.hpp"
#include "crowdstream/sim.hpp"

namespace crowdstream {

Json scheduler_to_json(const SchedulerParams& p);
SchedulerParams scheduler_from_json(const Json& j, SchedulerParams base = {});

/// report.json body. `records` adds the full transfer log.
Json sim_report_to_json(const SimReport& rep, bool records = false);

/// bounds.json body.
Json certificate_to_json(const BoundCertificate& cert);

Json instance_to_json(const SlottedInstance& inst);
/// Accepts either explicit slot arrays or {"profiles", "trace", "slot_length"}.
SlottedInstance instance_from_json(const Json& j);

}  // namespace crowdstream
