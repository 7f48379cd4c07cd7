#include "lfforge/filters.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace lfforge;
using lftest::constant;
using lftest::vehicle_from_speeds;

TEST_CASE("gap range equals an exhaustive max-min scan") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 40);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd g(1 + trial % 37);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = u(rng);
    double hi = g(0), lo = g(0);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      hi = g(i) > hi ? g(i) : hi;
      lo = g(i) < lo ? g(i) : lo;
    }
    CHECK(filters::gap_range(g) == hi - lo);
  }
  CHECK_THROWS(filters::gap_range(Eigen::VectorXd(0)));
}

TEST_CASE("sign change ratio") {
  Eigen::VectorXd v(4);
  v << 1, 2, -1, -2;
  CHECK(filters::sign_change_ratio(v) == doctest::Approx(0.25));
  v << 1, 1, 1, 1;
  CHECK(filters::sign_change_ratio(v) == 0.0);
  v << 1, -1, 1, -1;
  CHECK(filters::sign_change_ratio(v) == doctest::Approx(0.75));
  // zeros carry the previous sign, leading zeros none
  v << 0, 1, 0, -1;
  CHECK(filters::sign_change_ratio(v) == doctest::Approx(0.25));
  v << 0, 0, 0, 0;
  CHECK(filters::sign_change_ratio(v) == 0.0);
  Eigen::VectorXd scaled = 17.0 * Eigen::VectorXd::LinSpaced(4, -1.5, 1.5);
  CHECK(filters::sign_change_ratio(scaled) == filters::sign_change_ratio(Eigen::VectorXd::LinSpaced(4, -1.5, 1.5)));
}

TEST_CASE("stage 2 needs both a wide gap range and few sign changes") {
  // Approaching: LV at 8 m/s, SV at 9 m/s for 20 s, gap shrinks by 10 m.
  const auto lv = vehicle_from_speeds("1", VehicleClass::CAR, 30.0, 0.0, constant(41, 8.0));
  const auto sv = vehicle_from_speeds("2", VehicleClass::CAR, 0.0, 0.0, constant(41, 9.0));
  auto pair = lftest::whole_pair(lv, sv);
  filters::ThresholdConfig cfg;
  auto v = filters::flag_stage2(pair, cfg);
  CHECK(v.gap_range == doctest::Approx(20.0));
  CHECK(v.sign_change_ratio == 0.0);
  CHECK(v.remove);
  cfg.gap_range_max = 20.0;  // strict inequality
  CHECK_FALSE(filters::flag_stage2(pair, cfg).remove);
}

TEST_CASE("trim drops flagged ends only") {
  const auto lv = vehicle_from_speeds("1", VehicleClass::CAR, 20.0, 0.0, constant(21, 8.0));
  const auto sv = vehicle_from_speeds("2", VehicleClass::CAR, 0.0, 0.0, constant(21, 8.0));
  const auto pair = lftest::whole_pair(lv, sv);
  std::vector<bool> f(21, false);
  f[0] = f[1] = f[10] = f[20] = true;
  const auto r = filters::trim_pair(pair, f, 5.0, 0.5);
  REQUIRE(r.pair);
  CHECK(r.removed_front == 2);
  CHECK(r.removed_back == 1);
  CHECK(r.pair->window == FrameWindow{2, 19});
  CHECK(r.pair->samples.size() == 18);
  CHECK_FALSE(filters::trim_pair(pair, f, 9.0, 0.5).pair);  // 8.5 s left
  CHECK(filters::trim_pair(pair, f, 8.5, 0.5).pair);
}

TEST_CASE("stage 1 reasons fire independently") {
  const auto lv = vehicle_from_speeds("1", VehicleClass::CAR, 5.2, 1.8, constant(3, 12.0));
  const auto sv = vehicle_from_speeds("2", VehicleClass::CAR, 0.0, 0.0, constant(3, 15.0));
  const auto pair = lftest::whole_pair(lv, sv);
  filters::CategoryStats st;
  st.speed_kmh = {10, 20, 30, 40, 50};
  st.speed_whiskers = {10, 50};
  filters::ThresholdConfig cfg;
  const auto& fdp = fd::default_params().at(VehicleClass::CAR);
  const auto masks = filters::flag_stage1(pair, st, cfg, fdp);
  // gap 1.2 m, 54 km/h, rel vel -3 m/s, lateral -1.8 m
  const auto names = filters::reason_names(masks[0]);
  CHECK(masks[0] == (filters::SPEED_ABOVE_WHISKER | filters::REL_VEL_EXCESS | filters::LAT_GAP_EXCESS |
                     filters::TAILGATE | filters::FD_BAND));
  CHECK(names.size() == 5);
}

TEST_CASE("stage descriptors and presets") {
  CHECK(filters::parse_stage("stage1:kinematic").gate == filters::kKinematicReasons);
  CHECK(filters::parse_stage("stage1:TAILGATE+FAR_GAP").gate == (filters::TAILGATE | filters::FAR_GAP));
  CHECK(filters::parse_stage("wavelet:3").min_matches == 3);
  CHECK_THROWS_AS(filters::parse_stage("stage9"), ConfigError);
  CHECK_THROWS_AS(filters::parse_stage("wavelet:0"), ConfigError);
  CHECK_THROWS_AS(filters::preset("approach5"), ConfigError);
  const auto p4 = filters::preset("approach4");
  REQUIRE(p4.size() == 3);
  CHECK(p4[1].kind == filters::StageKind::Stage2);
  for (const char* n : {"approach1", "approach2", "approach3"}) CHECK_NOTHROW(filters::preset(n));
}

TEST_CASE("pipeline ledger accounts for every pair") {
  std::vector<Vehicle> vs;
  // Steady followers plus one approaching pair, in separate lanes.
  for (int k = 0; k < 6; ++k) {
    std::vector<double> lvs(61), svs(61);
    for (int i = 0; i < 61; ++i) {
      lvs[i] = 8.0 + 0.8 * std::sin(0.3 * i + k);
      svs[i] = 8.0 + 0.8 * std::sin(0.3 * (i - 1) + k);
    }
    if (k == 5) {
      lvs = constant(61, 8.0);
      svs = constant(61, 8.4);
    }
    vs.push_back(vehicle_from_speeds(std::to_string(2 * k + 1), VehicleClass::CAR, 25.0, 10.0 * k, lvs));
    vs.push_back(vehicle_from_speeds(std::to_string(2 * k + 2), VehicleClass::CAR, 5.0, 10.0 * k, svs));
  }
  const auto pairs = extract_pairs(vs, PairingCriteria{}, 0.5);
  REQUIRE(pairs.size() == 6);
  filters::PipelineInputs in;
  const auto stages = filters::preset("approach4");
  const auto out = filters::run_pipeline(pairs, stages, in);
  REQUIRE(out.pairs.size() == 6);
  REQUIRE(out.stages.size() == 3);
  CHECK(out.stages[0].total.pairs_in == 6);
  for (std::size_t s = 1; s < out.stages.size(); ++s)
    CHECK(out.stages[s].total.pairs_in == out.stages[s - 1].total.pairs_out);
  CHECK(out.survivors.size() == out.stages.back().total.pairs_out);
  std::size_t removed = 0;
  for (const auto& l : out.pairs) removed += l.status == filters::PairStatus::Removed;
  CHECK(removed + out.survivors.size() == 6);
  CHECK(out.pairs[5].status == filters::PairStatus::Removed);
  CHECK(out.pairs[5].removed_stage == "2:stage2");
}
