#include "lfforge/fdgap.hpp"

#include <cmath>
#include <set>
#include <string>

namespace lfforge::fd {

void FDParams::validate() const {
  if (!(w_kmh > 0) || !std::isfinite(w_kmh))
    throw ConfigError("FD backward wave speed must be positive and finite");
  if (!(jam_density > 0) || !std::isfinite(jam_density))
    throw ConfigError("FD jam density must be positive and finite");
}

FitResult fit_fd_params(VehicleClass cls, std::span<const std::pair<double, double>> samples) {
  std::set<double> distinct;
  for (const auto& s : samples) distinct.insert(s.first);
  if (distinct.size() < 2) throw DataError("FD fit needs at least two distinct speeds");

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd gaps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = samples[static_cast<std::size_t>(i)].first;
    gaps(i) = samples[static_cast<std::size_t>(i)].second;
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(gaps);
  const double b = coef(0), m = coef(1);
  if (!(b > 0) || !(m > 0))
    throw DataError("non-physical FD fit (intercept " + std::to_string(b) + ", slope " +
                    std::to_string(m) + ")");

  FitResult r;
  r.intercept_m = b;
  r.slope_m_per_kmh = m;
  r.params = {cls, b / m, 1000.0 / b};
  r.residual_rms = std::sqrt((design * coef - gaps).squaredNorm() / static_cast<double>(n));
  return r;
}

GapTable gap_threshold_table(std::span<const FDParams> params,
                             std::span<const double> speeds_kmh) {
  GapTable t;
  t.speeds_kmh.assign(speeds_kmh.begin(), speeds_kmh.end());
  for (const auto& p : params) t.classes.push_back(p.cls);
  t.gaps.resize(static_cast<Eigen::Index>(speeds_kmh.size()),
                static_cast<Eigen::Index>(params.size()));
  const Eigen::ArrayXd v =
      Eigen::Map<const Eigen::ArrayXd>(speeds_kmh.data(), static_cast<Eigen::Index>(speeds_kmh.size()));
  for (std::size_t c = 0; c < params.size(); ++c)
    t.gaps.col(static_cast<Eigen::Index>(c)) = desirable_gap(params[c], v).matrix();
  return t;
}

const GapTable& reference_gap_table() {
  static const GapTable table = [] {
    GapTable t;
    for (int v = 5; v <= 65; v += 5) t.speeds_kmh.push_back(v);
    t.classes = {VehicleClass::TW, VehicleClass::CAR, VehicleClass::HV, VehicleClass::LCV,
                 VehicleClass::AUTO};
    t.gaps.resize(13, 5);
    // clang-format off
    t.gaps <<
       1.86,  6.08, 15.08,  7.97,  4.54,
       2.90,  8.25, 19.05, 11.03,  6.80,
       3.93, 10.42, 23.02, 14.09,  9.07,
       4.97, 12.59, 26.98, 17.16, 11.34,
       6.00, 14.76, 30.95, 20.22, 13.61,
       7.04, 16.93, 34.92, 23.28, 15.87,
       8.07, 19.10, 38.89, 26.35, 18.14,
       9.11, 21.27, 42.86, 29.41, 20.41,
      10.14, 23.44, 46.83, 32.48, 22.68,
      11.18, 25.61, 50.79, 35.54, 24.94,
      12.21, 27.78, 54.76, 38.60, 27.21,
      13.25, 29.95, 58.73, 41.67, 29.48,
      14.28, 32.12, 62.70, 44.73, 31.75;
    // clang-format on
    return t;
  }();
  return table;
}

const std::map<VehicleClass, FDParams>& default_params() {
  static const std::map<VehicleClass, FDParams> params = [] {
    std::map<VehicleClass, FDParams> out;
    const auto& ref = reference_gap_table();
    for (std::size_t c = 0; c < ref.classes.size(); ++c) {
      std::vector<std::pair<double, double>> samples;
      for (std::size_t r = 0; r < ref.speeds_kmh.size(); ++r)
        samples.emplace_back(ref.speeds_kmh[r],
                             ref.gaps(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      out[ref.classes[c]] = fit_fd_params(ref.classes[c], samples).params;
    }
    return out;
  }();
  return params;
}

}  // namespace lfforge::fd
