#include "lfforge/pairing.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace lfforge;
using lftest::constant;
using lftest::vehicle_from_speeds;

TEST_CASE("closest overlapping vehicle ahead leads") {
  auto sv = vehicle_from_speeds("1", VehicleClass::CAR, 0.0, 0.0, constant(3, 10));
  auto near = vehicle_from_speeds("2", VehicleClass::CAR, 14.0, 0.5, constant(3, 10));
  auto far = vehicle_from_speeds("3", VehicleClass::CAR, 24.0, 0.0, constant(3, 10));
  auto beside = vehicle_from_speeds("4", VehicleClass::CAR, 8.0, 3.0, constant(3, 10));
  auto behind = vehicle_from_speeds("5", VehicleClass::CAR, -10.0, 0.0, constant(3, 10));
  std::vector<VehicleState> frame;
  for (auto* v : {&sv, &near, &far, &beside, &behind}) frame.push_back({v, &v->points[0]});
  PairingCriteria c;
  CHECK(resolve_leader(frame[0], frame, c) == "2");

  PairingCriteria loose = c;
  loose.require_overlap = false;
  CHECK(resolve_leader(frame[0], frame, loose) == "4");

  PairingCriteria tight = c;
  tight.max_gap = 5.0;
  CHECK_FALSE(resolve_leader(frame[0], frame, tight));
}

TEST_CASE("equal gaps go to the smaller id") {
  auto sv = vehicle_from_speeds("1", VehicleClass::TW, 0.0, 0.0, constant(2, 10), 0.5, 0, 2.0, 0.7);
  auto a = vehicle_from_speeds("12", VehicleClass::TW, 12.0, 0.3, constant(2, 10), 0.5, 0, 2.0, 0.7);
  auto b = vehicle_from_speeds("9", VehicleClass::TW, 12.0, -0.3, constant(2, 10), 0.5, 0, 2.0, 0.7);
  std::vector<VehicleState> frame{{&sv, &sv.points[0]}, {&a, &a.points[0]}, {&b, &b.points[0]}};
  CHECK(resolve_leader(frame[0], frame, PairingCriteria{}) == "9");
}

TEST_CASE("interpenetration resolves to no leader and is reported") {
  auto sv = vehicle_from_speeds("1", VehicleClass::CAR, 0.0, 0.0, constant(2, 10));
  auto lv = vehicle_from_speeds("2", VehicleClass::CAR, 2.0, 0.0, constant(2, 10));
  std::vector<VehicleState> frame{{&sv, &sv.points[0]}, {&lv, &lv.points[0]}};
  bool hit = false;
  CHECK_FALSE(resolve_leader(frame[0], frame, PairingCriteria{}, &hit));
  CHECK(hit);
}

TEST_CASE("pairs are maximal constant-leader runs above the duration floor") {
  const double dt = 0.5;
  // 30 s of following, then the leader pulls away beyond max_gap.
  std::vector<double> lv_speed(81, 10.0);
  for (std::size_t i = 61; i < lv_speed.size(); ++i) lv_speed[i] = 20.0;
  std::vector<Vehicle> vs{vehicle_from_speeds("1", VehicleClass::CAR, 20.0, 0.0, lv_speed),
                          vehicle_from_speeds("2", VehicleClass::CAR, 0.0, 0.0, constant(81, 10.0)),
                          // a short-lived vehicle ahead of 1, present for 4.5 s only
                          vehicle_from_speeds("3", VehicleClass::CAR, 40.0, 0.0, constant(10, 10.0))};
  PairingDiagnostics diag;
  const auto pairs = extract_pairs(vs, PairingCriteria{}, dt, &diag);
  REQUIRE(pairs.size() == 1);
  const auto& p = pairs[0];
  CHECK(p.id == "1-2-0");
  CHECK(p.window.first == 0);
  // gap = 18.5 + 5 (k - 61) from frame 61 on must stay <= 30
  CHECK(p.window.last == 63);
  CHECK(p.duration(dt) == doctest::Approx(31.5));
  CHECK(diag.interpenetration_instants == 0);
  CHECK(p.category() == "CAR-CAR");
}

TEST_CASE("duration floor counts intervals, not samples") {
  const double dt = 0.5;
  for (std::size_t n : {10, 11}) {  // 4.5 s and 5.0 s
    std::vector<Vehicle> vs{vehicle_from_speeds("1", VehicleClass::CAR, 20.0, 0.0, constant(n, 10)),
                            vehicle_from_speeds("2", VehicleClass::CAR, 0.0, 0.0, constant(n, 10))};
    CHECK(extract_pairs(vs, PairingCriteria{}, dt).size() == (n == 11 ? 1u : 0u));
  }
}

TEST_CASE("category summary and asymmetry") {
  CHECK(asymmetry(VehicleClass::HV, VehicleClass::TW) == Asymmetry::Positive);
  CHECK(asymmetry(VehicleClass::TW, VehicleClass::CAR) == Asymmetry::Negative);
  CHECK(asymmetry(VehicleClass::LCV, VehicleClass::LCV) == Asymmetry::Symmetric);
  std::vector<Vehicle> vs{vehicle_from_speeds("1", VehicleClass::HV, 25.0, 0.0, constant(20, 10), 0.5, 0, 10, 2.5),
                          vehicle_from_speeds("2", VehicleClass::TW, 0.0, 0.0, constant(20, 10), 0.5, 0, 2, 0.7)};
  const auto pairs = extract_pairs(vs, PairingCriteria{}, 0.5);
  const auto s = summarize_pairs(pairs, 1);
  REQUIRE(s.size() == 1);
  CHECK(s[0].label() == "HV-TW");
  CHECK(s[0].points == 20);
  CHECK(s[0].modelable);
}
