#include <cmath>
#include <vector>

#include <doctest.h>

#include "crowdstream/online.hpp"

using namespace crowdstream;

namespace {

UserProfile viewer(int id) {
  UserProfile p;
  p.id = id;
  p.ladder = {0.2, 0.4, 0.7, 1.3, 2.3};
  p.video_segments = 250;
  return p;
}

SchedulerState state(int users, double capacity) {
  SchedulerState st;
  st.capacity = capacity;
  st.neighbors.assign(static_cast<size_t>(users), 1);
  st.buffer.assign(static_cast<size_t>(users), 0.0);
  st.last_rate.assign(static_cast<size_t>(users), -1.0);
  st.next_segment.assign(static_cast<size_t>(users), 0);
  return st;
}

// J(t + gamma) - J(t) with the receiver refilled and everybody drained.
double drift_oracle(const std::vector<UserProfile>& ps, const SchedulerState& st, int u, double gamma) {
  double d = 0;
  for (size_t m = 0; m < ps.size(); ++m) {
    const double Q = ps[m].buffer_cap, q = st.buffer[m];
    double q2 = std::max(0.0, q - gamma);
    if (static_cast<int>(m) == u) q2 = std::min(Q, q2 + ps[m].beta);
    d += 0.5 * ((Q - q2) * (Q - q2) - (Q - q) * (Q - q));
  }
  return d;
}

}  // namespace

TEST_CASE("download time estimate") {
  std::vector<UserProfile> ps{viewer(0)};
  auto st = state(1, 4.6);
  CHECK(*estimate_download_time(ps, st, 0, 4) == doctest::Approx(1.0));
  st.capacity = 4.0;
  CHECK(*estimate_download_time(ps, st, 0, 0) == doctest::Approx(0.1));
  st.capacity = 0.0;
  CHECK_FALSE(estimate_download_time(ps, st, 0, 0).has_value());
}

TEST_CASE("decision payoff") {
  auto p = viewer(0);
  p.phi_qdeg = 1.0;
  p.phi_rebuf = 1.0;
  p.c_time = 0.1;
  p.c_data = 0.05;
  std::vector<UserProfile> ps{p};
  auto st = state(1, 4.6);
  st.buffer[0] = 0.5;
  st.last_rate[0] = 2.3;
  CHECK(decision_payoff(ps, st, 0, 4) == doctest::Approx(1.55784).epsilon(1e-5));
  CHECK(decision_payoff(ps, st, 0, 4) ==
        doctest::Approx(2 * std::log(3.3) - 0.5 - (0.1 + 0.05 * 4.6)).epsilon(1e-12));

  st.buffer[0] = 5.0;
  st.last_rate[0] = 1.3;
  CHECK(decision_payoff(ps, st, 0, 4) ==
        doctest::Approx(2 * std::log(3.3) - (0.1 + 0.05 * 4.6)).epsilon(1e-12));

  auto other = viewer(1);
  std::vector<UserProfile> two{p, other};
  auto st2 = state(2, 4.6);
  st2.buffer = {0.5, 0.2};
  st2.last_rate = {2.3, 0.7};
  CHECK(decision_payoff(two, st2, 0, 4) ==
        doctest::Approx(2 * std::log(3.3) - 0.5 - 0.33 - 0.8).epsilon(1e-12));
}

TEST_CASE("lyapunov drift") {
  std::vector<UserProfile> ps{viewer(0)};
  auto st = state(1, 2.0);
  st.buffer[0] = 10;
  CHECK(lyapunov_drift(ps, st, 0, 0) == doctest::Approx(drift_oracle(ps, st, 0, 0.2)));
  st.capacity = 2.3;
  CHECK(lyapunov_drift(ps, st, 0, 4) == doctest::Approx(0.0));
  st.capacity = 1.15;
  CHECK(lyapunov_drift(ps, st, 0, 4) == doctest::Approx(62.0));
  st.buffer[0] = 38;
  st.capacity = 1e9;
  CHECK(lyapunov_drift(ps, st, 0, 0) == doctest::Approx(-2.0).epsilon(1e-6));
  st.buffer[0] = 40;
  CHECK_THROWS_AS(lyapunov_drift(ps, st, 0, 0), ContractViolation);
}

TEST_CASE("wait when every buffer is over-full") {
  std::vector<UserProfile> ps{viewer(0), viewer(1)};
  auto st = state(2, 5.0);
  st.buffer = {39, 38.5};
  const auto d = lyapunov_decide(ps, st, 10);
  CHECK(d.kind == DecisionKind::kWait);
  CHECK(d.wait == doctest::Approx(0.5));
  st.capacity = 0;
  CHECK(lyapunov_decide(ps, st, 10, 1.0).wait == doctest::Approx(1.0));
}

TEST_CASE("large lambda maximizes the payoff") {
  auto p = viewer(0);
  p.c_time = 0.02;
  p.c_data = 0.02;
  std::vector<UserProfile> ps{p};
  const auto st = state(1, 5.0);
  int arg = -1;
  double best = -1e18;
  for (int z = 0; z < 5; ++z) {
    const double R = p.rate(z), vol = 2 * R;
    const double P = 2 * std::log(1 + R) - 0.02 * vol / 5.0 - 0.02 * vol;
    if (P > best) best = P, arg = z;
  }
  const auto d = lyapunov_decide(ps, st, 1e6);
  CHECK(d.kind == DecisionKind::kDownload);
  CHECK(d.owner == 0);
  CHECK(d.level == arg);
  CHECK(d.payoff == doctest::Approx(best));
}

TEST_CASE("zero lambda favors the largest idle buffer") {
  std::vector<UserProfile> ps{viewer(0), viewer(1), viewer(2)};
  auto st = state(3, 3.0);
  st.buffer = {30, 5, 20};
  int bu = -1, bz = -1;
  double best = 1e18;
  for (int u = 0; u < 3; ++u)
    for (int z = 0; z < 5; ++z) {
      const double d = drift_oracle(ps, st, u, ps[0].rate(z) * 2 / 3.0);
      if (d < best - 1e-12) best = d, bu = u, bz = z;
    }
  const auto d = lyapunov_decide(ps, st, 0.0);
  CHECK(d.owner == bu);
  CHECK(d.level == bz);
  CHECK(d.owner == 1);
}

TEST_CASE("harmonic mean prediction") {
  const std::vector<double> flat{2, 2, 2}, two{1, 4}, none;
  CHECK(predict_capacity(flat, 9) == doctest::Approx(2));
  CHECK(predict_capacity(two, 9) == doctest::Approx(1.6));
  CHECK(predict_capacity(none, 3) == doctest::Approx(3));
  const std::vector<double> long_h{100, 1, 1, 1, 1, 1};
  CHECK(predict_capacity(long_h, 9, 5) == doctest::Approx(1));
}

TEST_CASE("owner selection thresholds") {
  std::vector<UserProfile> ps{viewer(0), viewer(1)};
  auto st = state(2, 3.0);
  st.buffer = {30, 5};
  CHECK(select_owner(ps, st, 0.5, 10) == 1);
  st.buffer = {15, 5};
  CHECK(select_owner(ps, st, 0.5, 10) == 0);
  st.buffer = {30, 5};
  st.neighbors = {1, 0};
  CHECK(select_owner(ps, st, 0.5, 10) == 0);
}

TEST_CASE("baseline bitrate rules") {
  std::vector<UserProfile> ps{viewer(0)};
  SchedulerParams bp;
  bp.name = "buffer";
  auto st = state(1, 3.0);
  auto d = buffer_based_decide(ps, st, bp);
  CHECK(d.kind == DecisionKind::kDownload);
  CHECK(d.level == 0);
  st.buffer[0] = 38.0;
  d = buffer_based_decide(ps, st, bp);
  CHECK(d.level == 4);

  SchedulerParams pp;
  pp.name = "prediction";
  st.buffer[0] = 10;
  st.throughput = {1.0};
  d = prediction_based_decide(ps, st, pp);
  CHECK(d.level == 2);
  CHECK(ps[0].rate(d.level) == 0.7);
  st.throughput = {0.1};
  CHECK(prediction_based_decide(ps, st, pp).level == 0);
  CHECK(decide(ps, st, pp).level == 0);
}

TEST_CASE("parameter validation") {
  SchedulerParams p;
  p.name = "nope";
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.name = "lyapunov";
  p.lambda = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
