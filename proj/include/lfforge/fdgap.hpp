#pragma once

#include "lfforge/common.hpp"

#include <Eigen/Dense>

#include <concepts>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace lfforge::fd {

/// Class-wise fundamental-diagram parameters.
struct FDParams {
  VehicleClass cls = VehicleClass::CAR;
  double w_kmh = 0;        ///< backward wave speed, km/h
  double jam_density = 0;  ///< veh/km

  void validate() const;
};

/// k = w k_j / (w + v), veh/km. Throws std::domain_error for v < 0.
template <std::floating_point Scalar>
Scalar density_at_speed(const FDParams& p, Scalar v_kmh) {
  if (v_kmh < Scalar(0)) throw std::domain_error("negative speed");
  return Scalar(p.w_kmh * p.jam_density) / (Scalar(p.w_kmh) + v_kmh);
}

/// Equilibrium spacing s = 1000 / k = 1000 (w + v) / (w k_j), metres.
template <std::floating_point Scalar>
Scalar desirable_gap(const FDParams& p, Scalar v_kmh) {
  if (v_kmh < Scalar(0)) throw std::domain_error("negative speed");
  return Scalar(1000) * (Scalar(p.w_kmh) + v_kmh) / Scalar(p.w_kmh * p.jam_density);
}

/// Expression form over a speed vector (km/h); affine, so no per-element branch.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> desirable_gap(
    const FDParams& p, const Eigen::ArrayBase<Derived>& v_kmh) {
  using Scalar = typename Derived::Scalar;
  if ((v_kmh < Scalar(0)).any()) throw std::domain_error("negative speed");
  return Scalar(1000) * (Scalar(p.w_kmh) + v_kmh) / Scalar(p.w_kmh * p.jam_density);
}

/// Gap increase per km/h of speed: 1000 / (w k_j).
inline double gap_slope(const FDParams& p) { return 1000.0 / (p.w_kmh * p.jam_density); }

struct FitResult {
  FDParams params;
  double intercept_m = 0;
  double slope_m_per_kmh = 0;
  double residual_rms = 0;
};

/// Least-squares affine fit s = b + m v over (km/h, m) samples; k_j = 1000/b, w = b/m.
/// Throws DataError for fewer than two distinct speeds or a non-physical fit.
FitResult fit_fd_params(VehicleClass cls, std::span<const std::pair<double, double>> samples);

struct GapTable {
  std::vector<double> speeds_kmh;
  std::vector<VehicleClass> classes;
  Eigen::MatrixXd gaps;  ///< rows = speeds, cols = classes
};

GapTable gap_threshold_table(std::span<const FDParams> params, std::span<const double> speeds_kmh);

/// Speed / class columns in TW, CAR, HV, LCV, AUTO order, as published.
const GapTable& reference_gap_table();

/// Parameters back-fitted from reference_gap_table(), one per class.
const std::map<VehicleClass, FDParams>& default_params();

}  // namespace lfforge::fd
