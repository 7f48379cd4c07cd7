#pragma once

#include "lfforge/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lfforge {

/// One sample of a vehicle trajectory. Longitudinal position is the front
/// bumper, increasing in the travel direction; lateral position is the
/// vehicle centerline, positive to the right. SI units throughout.
struct TrajectoryPoint {
  double t = 0;
  double x_long = 0;
  double y_lat = 0;
  double v_long = 0;
  double v_lat = 0;
  double a_long = 0;
  double a_lat = 0;
};

/// Inclusive range of grid frames; frame f sits at t = f * dt.
struct FrameWindow {
  std::int64_t first = 0;
  std::int64_t last = -1;

  std::int64_t size() const { return last - first + 1; }
  bool empty() const { return last < first; }
  bool operator==(const FrameWindow&) const = default;
};

struct Vehicle {
  std::string id;
  VehicleClass cls = VehicleClass::CAR;
  double length = 0;
  double width = 0;
  /// Grid frame of points.front(); points are contiguous on the dt grid.
  std::int64_t first_frame = 0;
  std::vector<TrajectoryPoint> points;

  std::int64_t last_frame() const {
    return first_frame + static_cast<std::int64_t>(points.size()) - 1;
  }
  bool covers(std::int64_t frame) const { return frame >= first_frame && frame <= last_frame(); }
  const TrajectoryPoint& at_frame(std::int64_t frame) const {
    return points[static_cast<std::size_t>(frame - first_frame)];
  }
  FrameWindow frames() const { return {first_frame, last_frame()}; }
};

/// Deterministic vehicle-id order: all-digit ids compare numerically, otherwise lexicographically.
bool id_less(std::string_view a, std::string_view b);

/// LV/SV interaction quantities at one grid instant.
struct InteractionSample {
  double t = 0;
  double gap_long = 0;  ///< LV rear bumper minus SV front bumper
  double gap_lat = 0;   ///< SV centerline minus LV centerline (positive: SV to the right)
  double overlap = 0;   ///< intersection length of the lateral extents
  double rel_vel = 0;   ///< v_LV - v_SV
  double sv_speed = 0;
  double lv_speed = 0;
  double sv_accel = 0;
  double sv_lat_speed = 0;
  double lv_x = 0;
  double sv_x = 0;
};

/// max(0, min(right edges) - max(left edges)) of two centered lateral extents.
double lateral_overlap(double lv_y, double lv_width, double sv_y, double sv_width);

InteractionSample interaction_at(const Vehicle& lv, const TrajectoryPoint& lvp, const Vehicle& sv,
                                 const TrajectoryPoint& svp);

/// One sample per grid frame of the window. Throws DataError naming the first
/// instant either trajectory does not cover.
std::vector<InteractionSample> interaction_series(const Vehicle& lv, const Vehicle& sv,
                                                  FrameWindow window, double dt);
std::vector<InteractionSample> interaction_series(const Vehicle& lv, const Vehicle& sv, double t0,
                                                  double t1, double dt);

/// Column-wise access for numeric kernels.
Eigen::VectorXd column(std::span<const InteractionSample> samples,
                       double InteractionSample::*field);

// ---------------------------------------------------------------------------
// Ingestion

struct ColumnMapping {
  std::string id = "vehicle_id";
  std::string cls = "class";
  std::string t = "t";
  std::string x_long = "x_long";
  std::string y_lat = "y_lat";
  std::optional<std::string> v_long, v_lat, a_long, a_lat, length, width;

  /// Mapping for the canonical schema written by write_trajectories_csv.
  static ColumnMapping canonical();
};

struct Dimensions {
  double length = 0;
  double width = 0;
};

std::map<VehicleClass, Dimensions> default_dimensions();

struct IngestOptions {
  ColumnMapping mapping;
  double dt = 0.5;
  std::map<VehicleClass, Dimensions> default_dims = default_dimensions();
};

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

struct VehicleError {
  std::string vehicle_id;
  std::string message;
};

struct IngestResult {
  std::vector<Vehicle> vehicles;  ///< sorted by id_less
  std::vector<RecordError> record_errors;
  std::vector<VehicleError> vehicle_errors;
};

/// Reads a headered CSV, groups rows per vehicle, sorts by time, resamples
/// onto the dt grid by linear interpolation and synthesizes missing
/// velocity/acceleration columns by central differences. Throws ConfigError
/// when a required column is not present in the header.
IngestResult ingest(std::istream& source, const IngestOptions& options);

/// Canonical schema: vehicle_id,class,t,x_long,y_lat,v_long,v_lat,a_long,a_lat,length,width.
void write_trajectories_csv(std::ostream& out, std::span<const Vehicle> vehicles);

/// Central differences at interior points, one-sided at the ends.
Eigen::VectorXd finite_difference(const Eigen::VectorXd& values, double dt);

}  // namespace lfforge
