#include <cmath>
#include <vector>

#include <doctest.h>

#include "crowdstream/model.hpp"

using namespace crowdstream;

namespace {

UserProfile profile(double theta = 1.0) {
  UserProfile p;
  p.ladder = {0.2, 0.4, 0.7, 1.3, 2.3};
  p.theta = theta;
  p.video_segments = 10;
  return p;
}

SegmentRecord seg(int owner, int level, int index, double t0, double t1, const UserProfile& p,
                  int downloader = -1) {
  SegmentRecord r;
  r.downloader = downloader < 0 ? owner : downloader;
  r.owner = owner;
  r.level = level;
  r.rate = p.rate(level);
  r.seg_index = index;
  r.t_start = t0;
  r.t_end = t1;
  r.t_recv = t1;
  r.volume = p.segment_volume(level);
  return r;
}

bool has(const std::vector<Violation>& v, const std::string& c) {
  for (const auto& x : v)
    if (x.constraint == c) return true;
  return false;
}

}  // namespace

TEST_CASE("quality value is theta-scaled log") {
  CHECK(quality_value(profile(), 0.0) == doctest::Approx(0.0));
  CHECK(quality_value(profile(), 2.3) == doctest::Approx(1.19392).epsilon(1e-5));
  CHECK(quality_value(profile(0.5), 1.3) == doctest::Approx(0.50078).epsilon(1e-5));
}

TEST_CASE("value sums per-segment quality times beta") {
  const auto p = profile();
  CHECK(eval_value(p, {}) == 0.0);
  std::vector<SegmentRecord> one{seg(0, 4, 0, 0, 1, p)};
  CHECK(eval_value(p, one) == doctest::Approx(2 * std::log(3.3)));
  std::vector<SegmentRecord> two{seg(0, 2, 0, 0, 1, p), seg(0, 2, 1, 1, 2, p)};
  CHECK(eval_value(p, two) == doctest::Approx(4 * std::log(1.7)));
}

TEST_CASE("quality degradation counts only decreases") {
  auto p = profile();
  std::vector<SegmentRecord> up{seg(0, 3, 0, 0, 1, p), seg(0, 4, 1, 1, 2, p)};
  CHECK(eval_qdeg_loss(p, up) == 0.0);
  p.phi_qdeg = 1.0;
  std::vector<SegmentRecord> down{seg(0, 4, 0, 0, 1, p), seg(0, 3, 1, 1, 2, p)};
  CHECK(eval_qdeg_loss(p, down) == doctest::Approx(1.0));
  p.phi_qdeg = 2.0;
  std::vector<SegmentRecord> three{seg(0, 4, 0, 0, 1, p), seg(0, 2, 1, 1, 2, p),
                                   seg(0, 3, 2, 2, 3, p)};
  CHECK(eval_qdeg_loss(p, three) == doctest::Approx(3.2));
}

TEST_CASE("buffer update drains then refills") {
  CHECK(update_buffer(10, 4, 2) == doctest::Approx(8));
  CHECK(update_buffer(1, 3, 2) == doctest::Approx(2));
  CHECK(update_buffer(7.5, 0, 2) == doctest::Approx(9.5));
  CHECK_THROWS_AS(update_buffer(1, -1, 2), ContractViolation);
}

TEST_CASE("rebuffering between receptions") {
  auto p = profile();
  std::vector<SegmentRecord> smooth{seg(0, 0, 0, 0, 1, p), seg(0, 0, 1, 1, 2, p)};
  CHECK(eval_rebuf_loss(p, smooth).seconds == 0.0);

  std::vector<SegmentRecord> gap{seg(0, 0, 0, 0, 1, p), seg(0, 0, 1, 3, 4, p)};
  auto r = eval_rebuf_loss(p, gap);
  CHECK(r.loss == doctest::Approx(1.0));
  CHECK(r.seconds == doctest::Approx(1.0));

  p.phi_rebuf = 2.0;
  std::vector<SegmentRecord> two{seg(0, 0, 0, 0, 0, p), seg(0, 0, 1, 0, 2.5, p),
                                 seg(0, 0, 2, 2.5, 6.0, p)};
  r = eval_rebuf_loss(p, two);
  CHECK(r.loss == doctest::Approx(4.0));
  CHECK(r.seconds == doctest::Approx(2.0));
}

TEST_CASE("cellular, wifi and playback energy") {
  auto p = profile();
  CHECK(eval_cell_energy(p, {}) == 0.0);
  p.c_time = 0.1;
  p.c_data = 0.05;
  std::vector<SegmentRecord> one{seg(0, 3, 0, 0, 2, p)};
  CHECK(eval_cell_energy(p, one) == doctest::Approx(0.33));

  auto zero = profile();
  CHECK(eval_cell_energy(zero, one) == 0.0);

  p.w_data = 0.02;
  CHECK(eval_wifi_energy(p, one) == 0.0);
  std::vector<SegmentRecord> fwd{seg(1, 3, 0, 0, 2, p, 0)};
  CHECK(eval_wifi_energy(p, fwd) == doctest::Approx(0.052));
  p.w_time = 5.0;
  p.w_data = 0.0;
  CHECK(eval_wifi_energy(p, fwd) == 0.0);

  auto q = profile();
  CHECK(eval_play_energy(q, one) == 0.0);
  q.eps_time = 0.01;
  q.eps_rate = 0.005;
  std::vector<SegmentRecord> top{seg(0, 4, 0, 0, 1, q)};
  CHECK(eval_play_energy(q, top) == doctest::Approx(0.043));
  CHECK(eval_play_energy(q, {}) == 0.0);
}

TEST_CASE("social welfare composition and attribution") {
  auto p = profile();
  p.c_time = 0.1;
  p.c_data = 0.05;
  std::vector<UserProfile> one{p};
  CHECK(eval_social_welfare(one, {}).welfare == 0.0);

  std::vector<SegmentRecord> rec{seg(0, 4, 0, 0, 1, p)};
  const double want = 2 * std::log(3.3) - (0.1 * 1 + 0.05 * 4.6);
  CHECK(eval_social_welfare(one, rec).welfare == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(2.05784).epsilon(1e-5));

  auto helper = p;
  helper.id = 0;
  helper.w_data = 0.02;
  auto viewer = p;
  viewer.id = 1;
  std::vector<UserProfile> two{helper, viewer};
  std::vector<SegmentRecord> fwd{seg(1, 3, 0, 0, 2, viewer, 0)};
  const auto res = eval_social_welfare(two, fwd);
  CHECK(res.users[0].value == 0.0);
  CHECK(res.users[0].cell_energy == doctest::Approx(0.1 * 2 + 0.05 * 2.6));
  CHECK(res.users[0].wifi_energy == doctest::Approx(0.02 * 2.6));
  CHECK(res.users[1].value == doctest::Approx(2 * std::log(2.3)));
  CHECK(res.users[1].cell_energy == 0.0);
  for (const auto& u : res.users) CHECK(u.payoff == doctest::Approx(u.compose()));
  CHECK(res.welfare == doctest::Approx(res.users[0].payoff + res.users[1].payoff));
}

TEST_CASE("sequence validation flags capacity and encounter breaches") {
  auto p = profile();
  std::vector<UserProfile> one{p};
  NetworkTrace tr;
  tr.horizon = 10;
  tr.capacity = {CapacityTrace::constant(2.3, 10)};
  tr.encounters = EncounterTrace::none(1, 10);
  std::vector<SegmentRecord> ok{seg(0, 4, 0, 0, 2, p)};
  CHECK(validate_sequences(one, tr, ok).empty());

  tr.capacity = {CapacityTrace::constant(2.0, 10)};
  CHECK(has(validate_sequences(one, tr, ok), "C.2"));

  std::vector<UserProfile> two{p, p};
  two[1].id = 1;
  NetworkTrace t2;
  t2.horizon = 10;
  t2.capacity = {CapacityTrace::constant(5, 10), CapacityTrace::constant(5, 10)};
  t2.encounters = EncounterTrace(2, 10);
  t2.encounters.add(0, 1, {0, 1});
  t2.encounters.add(0, 1, {1.5, 10});
  std::vector<SegmentRecord> cross{seg(1, 0, 0, 0.5, 2, two[1], 0)};
  CHECK(has(validate_sequences(two, t2, cross), "C.3"));
}
