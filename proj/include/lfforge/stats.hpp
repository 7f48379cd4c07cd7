#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lfforge::stats {

/// Percentile of an ascending-sorted sample by linear interpolation between
/// order statistics (rank = pct/100 * (n-1)).
template <typename Derived>
typename Derived::Scalar percentile_sorted(const Eigen::DenseBase<Derived>& sorted,
                                           double pct) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = sorted.size();
  if (n == 0) throw std::invalid_argument("percentile of empty sample");
  if (n == 1) return sorted(0);
  const double rank = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(rank));
  const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
  const Scalar frac = static_cast<Scalar>(rank - static_cast<double>(lo));
  return sorted(lo) + frac * (sorted(hi) - sorted(lo));
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sorted_copy(
    const Eigen::DenseBase<Derived>& values) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out = values.derived();
  std::sort(out.data(), out.data() + out.size());
  return out;
}

template <typename Derived>
typename Derived::Scalar percentile(const Eigen::DenseBase<Derived>& values, double pct) {
  return percentile_sorted(sorted_copy(values), pct);
}

template <typename Scalar>
struct FiveNumber {
  Scalar min{}, q1{}, median{}, q3{}, max{};
};

template <typename Derived>
FiveNumber<typename Derived::Scalar> five_number_summary(
    const Eigen::DenseBase<Derived>& values) {
  const auto s = sorted_copy(values);
  if (s.size() == 0) throw std::invalid_argument("five-number summary of empty sample");
  return {s(0), percentile_sorted(s, 25), percentile_sorted(s, 50), percentile_sorted(s, 75),
          s(s.size() - 1)};
}

template <typename Scalar>
struct Whiskers {
  Scalar lower{}, upper{};
};

/// Tukey fences Q1 - 1.5 IQR and Q3 + 1.5 IQR, clamped to the data extremes.
template <typename Scalar>
Whiskers<Scalar> tukey_whiskers(const FiveNumber<Scalar>& f) {
  const Scalar iqr = f.q3 - f.q1;
  return {std::max(f.min, f.q1 - Scalar(1.5) * iqr), std::min(f.max, f.q3 + Scalar(1.5) * iqr)};
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace lfforge::stats
