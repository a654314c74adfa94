#include "crowdstream/offline.hpp"

namespace crowdstream {

BoundCertificate theorem1_certificate(const SlottedInstance& inst,
                                      const CertificateOptions& options) {
  constexpr double tol = 1e-9;
  BoundCertificate cert;
  const auto up = solve_slotted_relaxed(inst);
  cert.upper = up.bound;
  cert.upper_stats = up.stats;

  try {
    const auto lo = solve_slotted_exact(inst, {options.exact_budget});
    cert.lower = lo.welfare;
    cert.lower_stats = lo.stats;
    cert.lower_half = solve_slotted_exact(split_segments(inst, 2), {options.exact_budget}).welfare;
  } catch (const ResourceError&) {
    cert.partial = true;
  }

  if (options.run_middle) {
    try {
      BruteForceOptions bf;
      bf.slot_length = inst.slot_length;
      bf.node_budget = options.brute_budget;
      auto profiles = inst.profiles;
      for (size_t m = 0; m < profiles.size(); ++m) {
        profiles[m].video_segments = inst.budget[m];
        profiles[m].is_video_user = inst.budget[m] > 0;
      }
      const auto mid = brute_force_segmented(profiles, instance_trace(inst), bf);
      cert.middle = mid.welfare;
      cert.middle_stats = mid.stats;
    } catch (const ResourceError&) {
      cert.partial = true;
    }
  }

  if (cert.lower) {
    const double lower = *cert.lower;
    cert.chain_ok = lower <= cert.upper + tol;
    if (cert.middle) cert.chain_ok = cert.chain_ok && lower <= *cert.middle + tol &&
                                     *cert.middle <= cert.upper + tol;
  }
  cert.prop1_ok = cert.lower && cert.lower_half && *cert.lower <= *cert.lower_half + tol;
  return cert;
}

}  // namespace crowdstream
