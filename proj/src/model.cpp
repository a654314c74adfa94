#include "crowdstream/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace crowdstream {

void UserProfile::validate() const {
  auto fail = [&](const std::string& what) {
    throw ConfigError("user " + std::to_string(id) + ": " + what);
  };
  if (ladder.empty()) fail("empty bitrate ladder");
  for (size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i])) fail("bitrates must be positive");
    if (i > 0 && !(ladder[i] > ladder[i - 1])) fail("ladder must be strictly increasing");
  }
  if (!(beta > 0.0)) fail("beta must be positive");
  if (!(buffer_cap >= beta)) fail("buffer_cap must be at least beta");
  if (!(theta > 0.0)) fail("theta must be positive");
  for (double f : {phi_qdeg, phi_rebuf, c_time, c_data, w_time, w_data, eps_time, eps_rate})
    if (!(f >= 0.0) || !std::isfinite(f)) fail("QoE and energy factors must be nonnegative");
  if (video_segments < 0) fail("video_segments must be nonnegative");
}

SegmentRecord make_record(std::span<const UserProfile> profiles, int downloader, int owner,
                          int level, int seg_index, double t_start, double t_end) {
  const auto& p = profiles[static_cast<size_t>(owner)];
  SegmentRecord r;
  r.downloader = downloader;
  r.owner = owner;
  r.level = level;
  r.rate = p.rate(level);
  r.seg_index = seg_index;
  r.t_start = t_start;
  r.t_end = t_end;
  r.t_recv = t_end;
  r.volume = p.segment_volume(level);
  r.delivered = true;
  return r;
}

double quality_value(const UserProfile& profile, double rate) {
  if (rate < 0.0) throw std::domain_error("quality_value: negative rate");
  return std::log1p(profile.theta * rate);
}

double eval_value(const UserProfile& profile, std::span<const SegmentRecord> received) {
  double v = 0.0;
  for (const auto& r : received) v += quality_value(profile, r.rate) * profile.beta;
  return v;
}

double eval_qdeg_loss(const UserProfile& profile, std::span<const SegmentRecord> received) {
  double loss = 0.0;
  for (size_t k = 1; k < received.size(); ++k)
    loss += profile.phi_qdeg * std::max(0.0, received[k - 1].rate - received[k].rate);
  return loss;
}

double update_buffer(double prev_q, double gap, double beta) {
  if (gap < 0.0) throw ContractViolation("update_buffer: negative gap");
  if (prev_q < 0.0) throw ContractViolation("update_buffer: negative buffer");
  return std::max(0.0, prev_q - gap) + beta;
}

namespace {

double reception_gap(const SegmentRecord& prev, const SegmentRecord& cur) {
  const double gap = cur.t_recv - prev.t_recv;
  if (gap < 0.0 && gap > -kFeasTol) return 0.0;
  return gap;
}

}  // namespace

RebufResult eval_rebuf_loss(const UserProfile& profile, std::span<const SegmentRecord> received) {
  RebufResult out;
  double q = 0.0;
  for (size_t k = 0; k < received.size(); ++k) {
    if (k == 0) {
      q = update_buffer(0.0, 0.0, profile.beta);
      continue;
    }
    const double gap = reception_gap(received[k - 1], received[k]);
    const double stall = std::max(0.0, gap - q);
    out.seconds += stall;
    q = update_buffer(q, gap, profile.beta);
  }
  out.loss = profile.phi_rebuf * out.seconds;
  return out;
}

std::vector<double> buffer_trajectory(const UserProfile& profile,
                                      std::span<const SegmentRecord> received) {
  std::vector<double> out;
  out.reserve(received.size());
  double q = 0.0;
  for (size_t k = 0; k < received.size(); ++k) {
    const double gap = k == 0 ? 0.0 : reception_gap(received[k - 1], received[k]);
    q = update_buffer(q, gap, profile.beta);
    out.push_back(q);
  }
  return out;
}

double eval_cell_energy(const UserProfile& profile, std::span<const SegmentRecord> downloads) {
  double e = 0.0;
  for (const auto& r : downloads)
    e += profile.c_time * (r.t_end - r.t_start) + profile.c_data * r.volume;
  return e;
}

double eval_wifi_energy(const UserProfile& profile, std::span<const SegmentRecord> downloads) {
  double e = 0.0;
  for (const auto& r : downloads)
    if (r.owner != r.downloader) e += profile.w_time * 0.0 + profile.w_data * r.volume;
  return e;
}

double eval_play_energy(const UserProfile& profile, std::span<const SegmentRecord> received) {
  double e = 0.0;
  for (const auto& r : received)
    e += profile.eps_time * profile.beta + profile.eps_rate * r.rate * profile.beta;
  return e;
}

DownloadSequence download_sequence(std::span<const SegmentRecord> all, int downloader) {
  DownloadSequence out;
  for (const auto& r : all)
    if (r.downloader == downloader) out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.t_start < b.t_start;
  });
  return out;
}

ReceivingSequence receiving_sequence(std::span<const SegmentRecord> all, int owner) {
  ReceivingSequence out;
  for (const auto& r : all)
    if (r.delivered && r.owner == owner) out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.seg_index < b.seg_index;
  });
  return out;
}

WelfareResult eval_social_welfare(std::span<const UserProfile> profiles,
                                  std::span<const SegmentRecord> all) {
  std::set<std::pair<int, int>> seen;
  for (const auto& r : all) {
    if (r.owner < 0 || r.owner >= static_cast<int>(profiles.size()) || r.downloader < 0 ||
        r.downloader >= static_cast<int>(profiles.size()))
      throw IntegrityError("record refers to an unknown user");
    if (r.delivered && !seen.insert({r.owner, r.seg_index}).second)
      throw IntegrityError("duplicate delivered segment (owner " + std::to_string(r.owner) +
                           ", seg_index " + std::to_string(r.seg_index) + ")");
  }
  WelfareResult out;
  out.users.resize(profiles.size());
  for (size_t n = 0; n < profiles.size(); ++n) {
    const auto& p = profiles[n];
    const auto recv = receiving_sequence(all, static_cast<int>(n));
    const auto down = download_sequence(all, static_cast<int>(n));
    auto& b = out.users[n];
    b.value = eval_value(p, recv);
    b.qdeg_loss = eval_qdeg_loss(p, recv);
    const auto rb = eval_rebuf_loss(p, recv);
    b.rebuf_loss = rb.loss;
    b.rebuffer_seconds = rb.seconds;
    b.cell_energy = eval_cell_energy(p, down);
    b.wifi_energy = eval_wifi_energy(p, down);
    b.play_energy = eval_play_energy(p, recv);
    b.payoff = b.compose();
    out.welfare += b.payoff;
  }
  return out;
}

std::vector<Violation> validate_sequences(std::span<const UserProfile> profiles,
                                          const NetworkTrace& trace,
                                          std::span<const SegmentRecord> all) {
  std::vector<Violation> out;
  const int users = static_cast<int>(profiles.size());
  auto flag = [&](const char* c, int user, int index, std::string detail) {
    out.push_back({c, user, index, std::move(detail)});
  };

  for (size_t i = 0; i < all.size(); ++i) {
    const auto& r = all[i];
    const int idx = static_cast<int>(i);
    if (r.owner < 0 || r.owner >= users || r.downloader < 0 || r.downloader >= users ||
        r.downloader >= trace.users()) {
      flag("integrity", r.downloader, idx, "unknown user");
      continue;
    }
    const auto& p = profiles[static_cast<size_t>(r.owner)];
    if (r.level < 0 || r.level >= p.levels() || std::abs(r.rate - p.rate(r.level)) > kFeasTol)
      flag("integrity", r.owner, idx, "rate does not match the owner's ladder");
    if (r.t_start < -kFeasTol || r.t_end > trace.horizon + kFeasTol ||
        r.t_end < r.t_start - kFeasTol)
      flag("C.1", r.downloader, idx, "transfer interval outside [0, T] or reversed");
    if (!r.delivered) continue;
    if (r.t_recv < r.t_end - kFeasTol || r.t_recv > trace.horizon + kFeasTol)
      flag("order", r.owner, idx, "reception before download end or after horizon");
    const double vol = p.segment_volume(r.level < 0 || r.level >= p.levels() ? 0 : r.level);
    if (std::abs(r.volume - vol) > kFeasTol)
      flag("integrity", r.owner, idx, "delivered volume differs from rate * beta");
    const double t1 = std::clamp(r.t_start, 0.0, trace.horizon);
    const double t2 = std::clamp(r.t_end, t1, trace.horizon);
    const double cap = trace.integrate_capacity(r.downloader, t1, t2);
    if (vol > cap + kFeasTol) {
      std::ostringstream d;
      d << "needs " << vol << " Mbit, capacity " << cap << " Mbit";
      flag("C.2", r.downloader, idx, d.str());
    }
    if (r.downloader != r.owner && !trace.encounter_holds(r.downloader, r.owner, t1, t2))
      flag("C.3", r.downloader, idx, "not encountered throughout the transfer");
  }

  for (int n = 0; n < users && n < trace.users(); ++n) {
    std::vector<size_t> mine;
    for (size_t i = 0; i < all.size(); ++i)
      if (all[i].downloader == n) mine.push_back(i);
    std::stable_sort(mine.begin(), mine.end(),
                     [&](size_t a, size_t b) { return all[a].t_start < all[b].t_start; });
    for (size_t k = 1; k < mine.size(); ++k)
      if (all[mine[k - 1]].t_end > all[mine[k]].t_start + kFeasTol)
        flag("C.1", n, static_cast<int>(mine[k]), "overlaps the previous download");
  }

  for (int m = 0; m < users; ++m) {
    const auto& p = profiles[static_cast<size_t>(m)];
    const auto recv = receiving_sequence(all, m);
    bool ordered = true;
    for (size_t k = 1; k < recv.size(); ++k) {
      if (recv[k].seg_index == recv[k - 1].seg_index) {
        flag("integrity", m, recv[k].seg_index, "duplicate seg_index");
        ordered = false;
      } else if (recv[k].t_recv < recv[k - 1].t_recv - kFeasTol) {
        flag("order", m, recv[k].seg_index, "received after a later segment");
        ordered = false;
      }
    }
    if (p.video_segments > 0 && static_cast<int>(recv.size()) > p.video_segments)
      flag("budget", m, -1, "more segments than the video contains");
    if (!ordered) continue;
    const auto q = buffer_trajectory(p, recv);
    for (size_t k = 0; k < q.size(); ++k)
      if (q[k] > p.buffer_cap + kFeasTol) {
        std::ostringstream d;
        d << "buffer " << q[k] << " s exceeds " << p.buffer_cap << " s";
        flag("C.4", m, recv[k].seg_index, d.str());
      }
  }
  return out;
}

}  // namespace crowdstream
