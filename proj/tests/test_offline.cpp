#include <cmath>
#include <functional>
#include <limits>

#include <doctest.h>

#include "crowdstream/offline.hpp"
#include "fixtures.hpp"

using namespace crowdstream;
using fixtures::slot_trace;
using fixtures::tiny_profile;

namespace {

bool has(const std::vector<Violation>& v, const std::string& c) {
  for (const auto& x : v)
    if (x.constraint == c) return true;
  return false;
}

// Exhaustive search over every kappa with entries bounded by `cap`.
double enumerate_optimum(const SlottedInstance& inst, int cap) {
  SlottedSchedule k = SlottedSchedule::zeros(inst);
  const int S = inst.slots, N = inst.users(), Z = k.levels();
  std::vector<int> used(static_cast<size_t>(N), 0);
  double best = -std::numeric_limits<double>::infinity();
  const int cells = S * N * N * Z;
  std::function<void(int)> rec = [&](int i) {
    if (i == cells) {
      if (check_slotted_feasibility(inst, k).empty())
        best = std::max(best, eval_slotted_welfare(inst, k).welfare);
      return;
    }
    const int z = i % Z, m = i / Z % N, n = i / Z / N % N, s = i / Z / N / N;
    if (z >= inst.profiles[static_cast<size_t>(m)].levels()) return rec(i + 1);
    for (int c = 0; c <= cap && used[static_cast<size_t>(m)] + c <= inst.budget[static_cast<size_t>(m)]; ++c) {
      k.at(s, n, m, z) = c;
      used[static_cast<size_t>(m)] += c;
      rec(i + 1);
      used[static_cast<size_t>(m)] -= c;
    }
    k.at(s, n, m, z) = 0;
  };
  rec(0);
  return best;
}

SlottedInstance single(double mbps, int slots, std::vector<double> ladder, int segments) {
  std::vector<std::vector<double>> cap{std::vector<double>(static_cast<size_t>(slots), mbps)};
  return project_slotted({tiny_profile(0, std::move(ladder), segments)},
                         slot_trace(4.0, cap, std::vector<int>(static_cast<size_t>(slots), 0)), 4.0);
}

}  // namespace

TEST_CASE("projection cuts capacity per slot") {
  const auto inst = single(2.0, 3, {0.7, 2.3}, 2);
  CHECK(inst.slots == 3);
  CHECK(inst.capacity[0][1] == doctest::Approx(8.0));
  CHECK(inst.budget[0] == 2);
  const auto half = split_segments(inst, 2);
  CHECK(half.profiles[0].beta == doctest::Approx(1.0));
  CHECK(half.budget[0] == 4);
  CHECK(instance_trace(inst) == *inst.source);
}

TEST_CASE("slotted welfare of a single segment") {
  const auto inst = single(2.0, 1, {0.7, 2.3}, 1);
  auto k = SlottedSchedule::zeros(inst);
  CHECK(eval_slotted_welfare(inst, k).welfare == 0.0);
  k.at(0, 0, 0, 1) = 1;
  const double x = 4.6;
  const double want = 2 * std::log(3.3) - (0.02 * x / 8.0 * 4.0 + 0.02 * x);
  CHECK(eval_slotted_welfare(inst, k).welfare == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("two levels in one slot play in ascending order") {
  const auto inst = single(2.0, 1, {0.7, 2.3}, 2);
  auto k = SlottedSchedule::zeros(inst);
  k.at(0, 0, 0, 0) = 1;
  k.at(0, 0, 0, 1) = 1;
  CHECK(eval_slotted_welfare(inst, k).users[0].qdeg_loss == 0.0);
}

TEST_CASE("slotted feasibility") {
  const auto inst = single(1.0, 1, {0.7, 2.3}, 2);
  auto k = SlottedSchedule::zeros(inst);
  CHECK(check_slotted_feasibility(inst, k).empty());
  k.at(0, 0, 0, 1) = 1;
  CHECK(has(check_slotted_feasibility(inst, k), "C.2"));
  CHECK_THROWS_AS(eval_slotted_welfare(inst, k), FeasibilityError);

  auto two = project_slotted({tiny_profile(0, {0.7}, 1), tiny_profile(1, {0.7}, 1)},
                             slot_trace(4.0, {{2.0}, {2.0}}, {0}), 4.0);
  auto k2 = SlottedSchedule::zeros(two);
  k2.at(0, 0, 1, 0) = 1;
  CHECK(has(check_slotted_feasibility(two, k2), "C.3"));
}

TEST_CASE("exact optimum picks the best single level") {
  auto inst = single(2.0, 1, {0.4, 1.3}, 1);
  const auto r = solve_slotted_exact(inst);
  double best = 0.0;
  int arg = -1;
  for (int z = 0; z < 2; ++z) {
    const double x = inst.profiles[0].segment_volume(z);
    const double w = 2 * std::log(1 + inst.profiles[0].rate(z)) - (0.02 * x / 8.0 * 4.0 + 0.02 * x);
    if (w > best) best = w, arg = z;
  }
  CHECK(r.welfare == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.schedule.at(0, 0, 0, arg) == 1);
}

TEST_CASE("zero capacity leaves the zero schedule optimal") {
  const auto inst = single(0.0, 2, {0.7, 2.3}, 2);
  const auto r = solve_slotted_exact(inst);
  CHECK(r.welfare == 0.0);
  CHECK(r.schedule == SlottedSchedule::zeros(inst));
  CHECK(solve_slotted_relaxed(inst).bound == doctest::Approx(0.0).epsilon(1e-9));
  const auto cert = theorem1_certificate(inst);
  REQUIRE(cert.lower);
  REQUIRE(cert.middle);
  CHECK(*cert.lower == 0.0);
  CHECK(*cert.middle == 0.0);
  CHECK(cert.upper == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("helper downloads for a starved neighbor") {
  auto viewer = tiny_profile(0, {0.7, 2.3}, 1);
  auto helper = tiny_profile(1, {0.7}, 0);
  const auto inst = project_slotted({viewer, helper}, slot_trace(4.0, {{0.0}, {2.0}}, {1}), 4.0);
  const auto r = solve_slotted_exact(inst);
  CHECK(r.welfare > 0.0);
  CHECK(r.schedule.at(0, 1, 0, 1) == 1);
  CHECK(r.welfare == doctest::Approx(enumerate_optimum(inst, 1)).epsilon(1e-12));
}

TEST_CASE("exact solver matches exhaustive enumeration") {
  int compared = 0;
  for (std::uint64_t seed = 1; compared < 40; ++seed) {
    const auto inst = fixtures::random_tiny_instance(seed);
    const int cap = inst.users() == 1 ? 3 : 1;
    bool small = inst.users() == 1 || inst.slots <= 2;
    for (int b : inst.budget) small = small && (inst.users() == 1 || b <= 1);
    if (!small) continue;
    ++compared;
    CHECK(solve_slotted_exact(inst).welfare == doctest::Approx(enumerate_optimum(inst, cap)).epsilon(1e-9));
  }
}

TEST_CASE("relaxed bound dominates the exact optimum and ignores beta") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto inst = fixtures::random_tiny_instance(seed);
    const double ub = solve_slotted_relaxed(inst).bound;
    CHECK(ub >= solve_slotted_exact(inst).welfare - 1e-9);
    CHECK(solve_slotted_relaxed(split_segments(inst, 2)).bound == doctest::Approx(ub).epsilon(1e-9));
  }
}

TEST_CASE("embedding a slotted schedule preserves welfare") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const auto inst = fixtures::random_tiny_instance(seed);
    const auto r = solve_slotted_exact(inst);
    const auto recs = embed_schedule(inst, r.schedule);
    CHECK(validate_sequences(inst.profiles, *inst.source, recs).empty());
    CHECK(eval_social_welfare(inst.profiles, recs).welfare == doctest::Approx(r.welfare).epsilon(1e-9));
  }
}

TEST_CASE("segmented search on one slot matches the slotted optimum") {
  const auto inst = single(2.0, 1, {0.4, 1.3}, 1);
  BruteForceOptions opt;
  opt.slot_length = 4.0;
  const auto b = brute_force_segmented(inst.profiles, *inst.source, opt);
  CHECK(b.welfare == doctest::Approx(solve_slotted_exact(inst).welfare).epsilon(1e-12));
  CHECK(validate_sequences(inst.profiles, *inst.source, b.schedule).empty());

  NetworkTrace empty;
  empty.capacity = {CapacityTrace::constant(1.0, 0.0)};
  empty.encounters = EncounterTrace::none(1, 0.0);
  CHECK(brute_force_segmented(inst.profiles, empty).welfare == 0.0);
}

TEST_CASE("segmented search contains every slotted schedule") {
  for (std::uint64_t seed = 300; seed < 315; ++seed) {
    const auto inst = fixtures::random_tiny_instance(seed);
    BruteForceOptions opt;
    opt.slot_length = inst.slot_length;
    const auto b = brute_force_segmented(inst.profiles, *inst.source, opt);
    CHECK(b.welfare >= solve_slotted_exact(inst).welfare - 1e-9);
    CHECK(validate_sequences(inst.profiles, *inst.source, b.schedule).empty());
    CHECK(eval_social_welfare(inst.profiles, b.schedule).welfare == doctest::Approx(b.welfare).epsilon(1e-9));
  }
}

TEST_CASE("certificate chain on a tiny instance") {
  const auto inst = fixtures::random_tiny_instance(4);
  const auto cert = theorem1_certificate(inst);
  CHECK_FALSE(cert.partial);
  CHECK(cert.chain_ok);
  CHECK(cert.prop1_ok);
}

TEST_CASE("exhausted budget degrades to the upper bound") {
  const auto inst = fixtures::random_tiny_instance(4);
  CertificateOptions opt;
  opt.exact_budget = 1;
  opt.brute_budget = 1;
  const auto cert = theorem1_certificate(inst, opt);
  CHECK(cert.partial);
  CHECK_FALSE(cert.lower.has_value());
  CHECK(cert.upper >= 0.0);
}
