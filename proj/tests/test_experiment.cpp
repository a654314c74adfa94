#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "crowdstream/experiment.hpp"

using namespace crowdstream;
namespace fs = std::filesystem;

namespace {

Json small_spec() {
  return Json{{"scenario", "single"},
              {"users", 1},
              {"horizon", 60},
              {"schedulers", {"lyapunov", "buffer", "prediction"}},
              {"seeds", {{"first", 1}, {"count", 10}}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("spec parsing and cell expansion") {
  const auto spec = ExperimentSpec::from_json(small_spec());
  CHECK(spec.seeds.size() == 10);
  CHECK(expand_cells(spec).size() == 30);
  auto j = small_spec();
  j["lambda"] = {1, 10, 100};
  CHECK(expand_cells(ExperimentSpec::from_json(j)).size() == 50);
  CHECK(ExperimentSpec::from_json(spec.to_json()).to_json() == spec.to_json());
}

TEST_CASE("bad specs are config errors") {
  auto j = small_spec();
  j["schedulers"] = {"bba"};
  CHECK_THROWS_AS(ExperimentSpec::from_json(j), ConfigError);
  j = small_spec();
  j["users"] = 0;
  CHECK_THROWS_AS(ExperimentSpec::from_json(j), ConfigError);
  j = small_spec();
  j["cooperation"] = {"sometimes"};
  CHECK_THROWS_AS(ExperimentSpec::from_json(j), ConfigError);
}

TEST_CASE("video users are the first ids") {
  auto j = small_spec();
  j["scenario"] = "multi";
  j["users"] = 10;
  j["video_fraction"] = 0.2;
  const auto ps = build_profiles(ExperimentSpec::from_json(j));
  int video = 0;
  for (const auto& p : ps) video += p.is_video_user;
  CHECK(video == 2);
  CHECK(ps[1].is_video_user);
  CHECK_FALSE(ps[2].is_video_user);
  CHECK(ps[2].video_segments == 0);
}

TEST_CASE("matrix outputs are reproducible") {
  const auto spec = ExperimentSpec::from_json(small_spec());
  const auto a = run_matrix(spec, 2);
  const auto b = run_matrix(spec, 1);
  CHECK(summary_csv(a) == summary_csv(b));
  for (const auto& r : a) {
    CHECK(r.error.empty());
    REQUIRE(r.report);
    CHECK(r.gap.has_value());
  }
  const auto dir = fs::temp_directory_path() / "crowdstream_tests" / "matrix";
  fs::remove_all(dir);
  write_outputs(spec, a, dir.string());
  int reports = 0;
  for (const auto& e : fs::directory_iterator(dir / "cells"))
    reports += fs::exists(e.path() / "report.json");
  CHECK(reports == 30);
  CHECK(slurp(dir / "summary.csv") == summary_csv(a));
}

TEST_CASE("cooperation gain pairs full with none") {
  auto j = small_spec();
  j["scenario"] = "multi";
  j["users"] = 3;
  j["video_fraction"] = 0.34;
  j["schedulers"] = {"lyapunov"};
  j["cooperation"] = {"none", "full"};
  j["capacity_range"] = {0.0, 0.7};
  j["seeds"] = {3};
  const auto res = run_matrix(ExperimentSpec::from_json(j));
  REQUIRE(res.size() == 2);
  const auto& none = res[0].cell.cooperation == "none" ? res[0] : res[1];
  const auto& full = res[0].cell.cooperation == "full" ? res[0] : res[1];
  REQUIRE(full.coop_gain);
  CHECK(*full.coop_gain == doctest::Approx((full.report->avg_bitrate - none.report->avg_bitrate) /
                                           none.report->avg_bitrate));
  CHECK_FALSE(none.coop_gain);
}
