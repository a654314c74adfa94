#include <algorithm>
#include <cmath>
#include <sstream>

#include "crowdstream/offline.hpp"

namespace crowdstream {

int segment_budget(const UserProfile& p) { return p.is_video_user ? p.video_segments : 0; }

void SlottedInstance::validate() const {
  const size_t n = profiles.size();
  if (!(slot_length > 0.0)) throw ConfigError("slot_length must be positive");
  if (slots < 0) throw ConfigError("negative slot count");
  if (capacity.size() != n || meet.size() != n || budget.size() != n)
    throw ConfigError("slotted instance: per-user arrays do not match the user count");
  for (size_t a = 0; a < n; ++a) {
    profiles[a].validate();
    if (capacity[a].size() != static_cast<size_t>(slots))
      throw ConfigError("slotted instance: capacity length differs from slot count");
    for (double h : capacity[a])
      if (!(h >= 0.0)) throw ConfigError("slotted instance: negative capacity");
    if (meet[a].size() != n) throw ConfigError("slotted instance: bad encounter matrix");
    for (size_t b = 0; b < n; ++b) {
      if (meet[a][b].size() != static_cast<size_t>(slots))
        throw ConfigError("slotted instance: encounter length differs from slot count");
      if (meet[a][b] != meet[b][a]) throw ConfigError("slotted instance: asymmetric encounters");
    }
    if (budget[a] < 0) throw ConfigError("slotted instance: negative budget");
  }
}

SlottedInstance project_slotted(std::vector<UserProfile> profiles, const NetworkTrace& trace,
                                double slot_length) {
  if (!(slot_length > 0.0)) throw ConfigError("slot_length must be positive");
  if (static_cast<int>(profiles.size()) != trace.users())
    throw ConfigError("profile count differs from trace user count");
  SlottedInstance inst;
  inst.slot_length = slot_length;
  inst.slots = static_cast<int>(std::floor(trace.horizon / slot_length + 1e-9));
  const int n = trace.users();
  inst.capacity.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(inst.slots)));
  inst.meet.assign(static_cast<size_t>(n),
                   std::vector<std::vector<char>>(static_cast<size_t>(n),
                                                  std::vector<char>(static_cast<size_t>(inst.slots), 0)));
  for (int a = 0; a < n; ++a) {
    for (int s = 0; s < inst.slots; ++s) {
      const double t1 = s * slot_length;
      const double t2 = std::min(trace.horizon, (s + 1) * slot_length);
      inst.capacity[static_cast<size_t>(a)][static_cast<size_t>(s)] = trace.integrate_capacity(a, t1, t2);
      for (int b = 0; b < n; ++b)
        inst.meet[static_cast<size_t>(a)][static_cast<size_t>(b)][static_cast<size_t>(s)] =
            trace.encounter_holds(a, b, t1, t2) ? 1 : 0;
    }
  }
  for (const auto& p : profiles) inst.budget.push_back(segment_budget(p));
  inst.profiles = std::move(profiles);
  inst.source = trace;
  inst.validate();
  return inst;
}

std::vector<UserProfile> split_segments(std::vector<UserProfile> profiles, int k) {
  if (k < 1) throw ConfigError("split factor must be positive");
  for (auto& p : profiles) {
    p.beta /= k;
    p.video_segments *= k;
  }
  return profiles;
}

SlottedInstance split_segments(const SlottedInstance& inst, int k) {
  SlottedInstance out = inst;
  out.profiles = split_segments(inst.profiles, k);
  for (auto& b : out.budget) b *= k;
  return out;
}

NetworkTrace instance_trace(const SlottedInstance& inst) {
  if (inst.source) return *inst.source;
  NetworkTrace tr;
  const double L = inst.slot_length;
  tr.horizon = inst.slots * L;
  const int n = inst.users();
  for (int a = 0; a < n; ++a) {
    std::vector<double> times, rates;
    for (int s = 0; s < inst.slots; ++s) {
      times.push_back(s * L);
      rates.push_back(inst.capacity[static_cast<size_t>(a)][static_cast<size_t>(s)] / L);
    }
    if (times.empty()) {
      times.push_back(0.0);
      rates.push_back(0.0);
    }
    tr.capacity.emplace_back(times, rates, tr.horizon);
  }
  tr.encounters = EncounterTrace(n, tr.horizon);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int s = 0; s < inst.slots; ++s)
        if (inst.encountered(a, b, s)) tr.encounters.add(a, b, {s * L, (s + 1) * L});
  return tr;
}

SlottedSchedule SlottedSchedule::zeros(const SlottedInstance& inst) {
  int z = 1;
  for (const auto& p : inst.profiles) z = std::max(z, p.levels());
  return {inst.slots, inst.users(), z};
}

namespace {

void check_shape(const SlottedInstance& inst, const SlottedSchedule& k) {
  if (k.slots() != inst.slots || k.users() != inst.users())
    throw ContractViolation("schedule shape does not match the instance");
}

}  // namespace

std::vector<Violation> check_slotted_feasibility(const SlottedInstance& inst,
                                                 const SlottedSchedule& k) {
  check_shape(inst, k);
  std::vector<Violation> out;
  const int N = inst.users();
  std::vector<int> used(static_cast<size_t>(N), 0);
  std::vector<double> q(static_cast<size_t>(N), 0.0);
  for (int s = 0; s < inst.slots; ++s) {
    std::vector<double> y(static_cast<size_t>(N), 0.0);
    for (int n = 0; n < N; ++n) {
      double x = 0.0;
      for (int m = 0; m < N; ++m) {
        const auto& p = inst.profiles[static_cast<size_t>(m)];
        for (int z = 0; z < k.levels(); ++z) {
          const int c = k.at(s, n, m, z);
          if (c == 0) continue;
          if (c < 0 || z >= p.levels()) {
            out.push_back({"integrity", n, s, "negative count or level outside the ladder"});
            continue;
          }
          if (!inst.encountered(n, m, s))
            out.push_back({"C.3", n, s, "download for user " + std::to_string(m) + " without encounter"});
          x += c * p.segment_volume(z);
          y[static_cast<size_t>(m)] += c * p.beta;
          used[static_cast<size_t>(m)] += c;
        }
      }
      const double H = inst.capacity[static_cast<size_t>(n)][static_cast<size_t>(s)];
      if (x > H + kFeasTol) {
        std::ostringstream d;
        d << "needs " << x << " Mbit, capacity " << H << " Mbit";
        out.push_back({"C.2", n, s, d.str()});
      }
    }
    for (int m = 0; m < N; ++m) {
      auto& qm = q[static_cast<size_t>(m)];
      qm = std::max(0.0, qm - inst.slot_length) + y[static_cast<size_t>(m)];
      if (qm > inst.profiles[static_cast<size_t>(m)].buffer_cap + kFeasTol) {
        std::ostringstream d;
        d << "buffer " << qm << " s exceeds " << inst.profiles[static_cast<size_t>(m)].buffer_cap;
        out.push_back({"C.4", m, s, d.str()});
      }
    }
  }
  for (int m = 0; m < N; ++m)
    if (used[static_cast<size_t>(m)] > inst.budget[static_cast<size_t>(m)])
      out.push_back({"budget", m, -1, "more segments than the video contains"});
  return out;
}

SlottedEval eval_slotted_welfare(const SlottedInstance& inst, const SlottedSchedule& k) {
  auto violations = check_slotted_feasibility(inst, k);
  if (!violations.empty()) {
    const auto what = "infeasible slotted schedule: " + violations.front().constraint + " " +
                      violations.front().detail;
    throw FeasibilityError(what, std::move(violations));
  }
  const int N = inst.users();
  const double L = inst.slot_length;
  SlottedEval ev;
  ev.users.resize(static_cast<size_t>(N));
  ev.buffer.assign(static_cast<size_t>(N), std::vector<double>(static_cast<size_t>(inst.slots), 0.0));

  for (int m = 0; m < N; ++m) {
    const auto& p = inst.profiles[static_cast<size_t>(m)];
    auto& b = ev.users[static_cast<size_t>(m)];
    int first = -1, last = -1;
    for (int s = 0; s < inst.slots; ++s)
      for (int n = 0; n < N; ++n)
        for (int z = 0; z < p.levels(); ++z)
          if (k.at(s, n, m, z) > 0) {
            if (first < 0) first = s;
            last = s;
          }
    double q = 0.0;
    double prev_high = -1.0;
    for (int s = 0; s < inst.slots; ++s) {
      double y = 0.0, low = -1.0, high = -1.0;
      for (int z = 0; z < p.levels(); ++z) {
        int c = 0;
        for (int n = 0; n < N; ++n) c += k.at(s, n, m, z);
        if (c == 0) continue;
        const double r = p.rate(z);
        b.value += c * quality_value(p, r) * p.beta;
        b.play_energy += c * (p.eps_time * p.beta + p.eps_rate * r * p.beta);
        y += c * p.beta;
        if (low < 0.0) low = r;
        high = r;
      }
      if (first >= 0 && s > first && s <= last) b.rebuffer_seconds += std::max(0.0, L - q);
      if (high >= 0.0) {
        if (prev_high >= 0.0) b.qdeg_loss += p.phi_qdeg * std::max(0.0, prev_high - low);
        prev_high = high;
      }
      q = std::max(0.0, q - L) + y;
      ev.buffer[static_cast<size_t>(m)][static_cast<size_t>(s)] = q;
    }
    b.rebuf_loss = p.phi_rebuf * b.rebuffer_seconds;
  }

  for (int n = 0; n < N; ++n) {
    const auto& pn = inst.profiles[static_cast<size_t>(n)];
    auto& b = ev.users[static_cast<size_t>(n)];
    for (int s = 0; s < inst.slots; ++s) {
      double x = 0.0;
      for (int m = 0; m < N; ++m) {
        const auto& pm = inst.profiles[static_cast<size_t>(m)];
        double xm = 0.0;
        for (int z = 0; z < pm.levels(); ++z) xm += k.at(s, n, m, z) * pm.segment_volume(z);
        x += xm;
        if (m != n) b.wifi_energy += pn.w_data * xm;
      }
      if (x > 0.0) {
        const double H = inst.capacity[static_cast<size_t>(n)][static_cast<size_t>(s)];
        b.cell_energy += pn.c_time * (x / H) * L + pn.c_data * x;
      }
    }
  }
  for (auto& b : ev.users) {
    b.payoff = b.compose();
    ev.welfare += b.payoff;
  }
  return ev;
}

std::vector<SegmentRecord> embed_schedule(const SlottedInstance& inst, const SlottedSchedule& k) {
  check_shape(inst, k);
  const NetworkTrace tr = instance_trace(inst);
  const int N = inst.users();
  const double L = inst.slot_length;
  std::vector<SegmentRecord> out;
  std::vector<int> next_index(static_cast<size_t>(N), 0);
  for (int s = 0; s < inst.slots; ++s) {
    const size_t slot_begin = out.size();
    for (int n = 0; n < N; ++n) {
      double t = s * L;
      for (int m = 0; m < N; ++m) {
        const auto& p = inst.profiles[static_cast<size_t>(m)];
        for (int z = 0; z < p.levels() && z < k.levels(); ++z) {
          for (int c = 0; c < k.at(s, n, m, z); ++c) {
            const auto end = tr.capacity[static_cast<size_t>(n)].transfer_end(t, p.segment_volume(z));
            const double t_end = end ? std::min(*end, (s + 1) * L) : (s + 1) * L;
            auto r = make_record(inst.profiles, n, m, z, 0, t, t_end);
            r.t_recv = (s + 1) * L;
            out.push_back(r);
            t = t_end;
          }
        }
      }
    }
    std::stable_sort(out.begin() + static_cast<long>(slot_begin), out.end(),
                     [](const SegmentRecord& a, const SegmentRecord& b) {
                       return a.owner != b.owner ? a.owner < b.owner : a.rate < b.rate;
                     });
    for (size_t i = slot_begin; i < out.size(); ++i)
      out[i].seg_index = next_index[static_cast<size_t>(out[i].owner)]++;
  }
  return out;
}

}  // namespace crowdstream
