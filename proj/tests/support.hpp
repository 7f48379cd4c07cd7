#pragma once

#include "lfforge/pairing.hpp"
#include "lfforge/trajmodel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lftest {

/// Vehicle on the dt grid driven by a speed profile (m/s). Positions integrate
/// the speeds with the trapezoid rule; accelerations are plain differences.
inline lfforge::Vehicle vehicle_from_speeds(std::string id, lfforge::VehicleClass cls, double x0,
                                            double y, const std::vector<double>& speeds,
                                            double dt = 0.5, std::int64_t first_frame = 0,
                                            double length = 4.0, double width = 1.7) {
  lfforge::Vehicle v;
  v.id = std::move(id);
  v.cls = cls;
  v.length = length;
  v.width = width;
  v.first_frame = first_frame;
  double x = x0;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (i > 0) x += 0.5 * (speeds[i - 1] + speeds[i]) * dt;
    lfforge::TrajectoryPoint p;
    p.t = static_cast<double>(first_frame + static_cast<std::int64_t>(i)) * dt;
    p.x_long = x;
    p.y_lat = y;
    p.v_long = speeds[i];
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 < speeds.size() ? i + 1 : i;
    p.a_long = b > a ? (speeds[b] - speeds[a]) / (static_cast<double>(b - a) * dt) : 0.0;
    v.points.push_back(p);
  }
  return v;
}

inline std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

/// Base pair covering both vehicles' common frames.
inline lfforge::CandidatePair whole_pair(const lfforge::Vehicle& lv, const lfforge::Vehicle& sv,
                                         double dt = 0.5) {
  const lfforge::FrameWindow w{std::max(lv.first_frame, sv.first_frame),
                               std::min(lv.last_frame(), sv.last_frame())};
  auto p = lfforge::make_pair(lv, sv, w, dt);
  return p;
}

}  // namespace lftest
