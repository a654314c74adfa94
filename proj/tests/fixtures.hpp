#pragma once

// Shared generators for tiny slot-aligned instances.

#include <cstdint>
#include <random>

#include "crowdstream/offline.hpp"

namespace fixtures {

using namespace crowdstream;

inline UserProfile tiny_profile(int id, std::vector<double> ladder, int segments) {
  UserProfile p;
  p.id = id;
  p.beta = 2.0;
  p.buffer_cap = 6.0;
  p.ladder = std::move(ladder);
  p.theta = 1.0;
  p.phi_qdeg = 0.5;
  p.phi_rebuf = 1.0;
  p.c_time = 0.02;
  p.c_data = 0.02;
  p.w_data = 0.01;
  p.is_video_user = segments > 0;
  p.video_segments = segments;
  return p;
}

/// Piecewise-constant per-slot capacity and whole-slot encounters.
inline NetworkTrace slot_trace(double L, const std::vector<std::vector<double>>& mbps,
                               const std::vector<int>& meet01) {
  const int N = static_cast<int>(mbps.size());
  const int S = static_cast<int>(mbps.front().size());
  NetworkTrace tr;
  tr.horizon = L * S;
  for (const auto& row : mbps) {
    std::vector<double> times;
    for (int s = 0; s < S; ++s) times.push_back(L * s);
    tr.capacity.emplace_back(times, row, tr.horizon);
  }
  tr.encounters = EncounterTrace(N, tr.horizon);
  if (N == 2)
    for (int s = 0; s < S; ++s)
      if (meet01[static_cast<size_t>(s)]) tr.encounters.add(0, 1, {L * s, L * (s + 1)});
  return tr;
}

/// N <= 2, at most 3 slots of 4 s, at most 2 levels, at most 3 segments per user.
inline SlottedInstance random_tiny_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const double L = 4.0;
  const int N = pick(1, 2);
  const int S = pick(1, 3);
  const std::vector<std::vector<double>> ladders{{0.7}, {0.4, 1.3}, {0.7, 2.3}};
  std::vector<UserProfile> profiles;
  for (int n = 0; n < N; ++n) {
    const int segs = n == 1 && pick(0, 2) == 0 ? 0 : pick(1, 3);
    profiles.push_back(tiny_profile(n, ladders[static_cast<size_t>(pick(0, 2))], segs));
  }
  const std::vector<double> rates{0.0, 0.2, 0.35, 0.7, 1.0, 1.5};
  std::vector<std::vector<double>> mbps(static_cast<size_t>(N));
  for (auto& row : mbps)
    for (int s = 0; s < S; ++s) row.push_back(rates[static_cast<size_t>(pick(0, 5))]);
  std::vector<int> meet;
  for (int s = 0; s < S; ++s) meet.push_back(pick(0, 1));
  return project_slotted(profiles, slot_trace(L, mbps, meet), L);
}

}  // namespace fixtures
