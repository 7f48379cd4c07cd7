#pragma once

#include "lfforge/pairing.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

namespace lfforge::wavelet {

/// Which series the transform is applied to. SpeedChange feeds the central
/// difference of speed (m/s^2), so an abrupt speed change maps to an energy
/// maximum centred on the change; Speed feeds the raw series.
enum class Signal { SpeedChange, Speed };

std::string_view to_string(Signal s);
Signal parse_signal(std::string_view s);

struct WaveletConfig {
  std::vector<double> scales{1.0, 2.0, 4.0};  ///< seconds
  double max_lag = 2.0;                       ///< seconds
  int min_matches = 1;
  double prominence_frac = 0.1;
  bool symmetric_lag = false;  ///< false: SV peak at or after the LV peak
  Signal signal = Signal::SpeedChange;

  void validate() const;
  double max_scale() const;
};

/// Normalized Mexican hat (negative second derivative of a Gaussian).
template <typename Scalar>
Scalar mexican_hat(Scalar u) {
  using std::exp;
  const Scalar norm = Scalar(2) / (std::sqrt(Scalar(3)) * std::pow(Scalar(std::numbers::pi), Scalar(0.25)));
  return norm * (Scalar(1) - u * u) * exp(-u * u / Scalar(2));
}

/// Kernel half-width in units of the scale; |psi| < 1e-6 beyond it.
inline constexpr double kKernelSupport = 6.0;

/// W(a, t_j) = sum_k x_k psi((t_k - t_j)/a) dt / sqrt(a), truncated at the
/// series ends and at |t_k - t_j| <= kKernelSupport * a.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> cwt_coefficients(
    const Eigen::MatrixBase<Derived>& x, double dt, double scale) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  const auto half = static_cast<Eigen::Index>(std::ceil(kKernelSupport * scale / dt));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kernel(2 * half + 1);
  const Scalar gain = Scalar(dt / std::sqrt(scale));
  for (Eigen::Index d = -half; d <= half; ++d)
    kernel(d + half) = mexican_hat(Scalar(static_cast<double>(d) * dt / scale)) * gain;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar acc(0);
    const Eigen::Index d0 = std::max<Eigen::Index>(-half, -j);
    const Eigen::Index d1 = std::min<Eigen::Index>(half, n - 1 - j);
    for (Eigen::Index d = d0; d <= d1; ++d) acc += x(j + d) * kernel(d + half);
    w(j) = acc;
  }
  return w;
}

struct EnergyProfile {
  double t0 = 0;
  double dt = 0.5;
  Eigen::VectorXd energy;
  std::vector<Eigen::Index> peaks;  ///< indices into energy, ascending
  Eigen::Index detect_first = 0;    ///< peak-detection region, inclusive
  Eigen::Index detect_last = -1;

  double t(Eigen::Index i) const { return t0 + static_cast<double>(i) * dt; }
  std::vector<double> peak_times() const;
};

/// Local maxima of `energy` inside [first, last] whose topographic prominence
/// within that region is at least frac * max(energy over the region).
std::vector<Eigen::Index> find_peaks(const Eigen::VectorXd& energy, Eigen::Index first,
                                     Eigen::Index last, double prominence_frac);

/// E(t) = sum over scales of W(a, t)^2. The outer ceil(max_scale/dt) samples
/// per side are excluded from peak detection. Throws DataError when the
/// series is shorter than 2 max_scale / dt samples.
EnergyProfile cwt_energy(const Eigen::VectorXd& speed, double t0, double dt,
                         const WaveletConfig& cfg);

struct MatchResult {
  bool matched = false;
  int count = 0;
  std::vector<std::pair<double, double>> pairs;  ///< (t_lv, t_sv)
};

/// Greedy chronological matching: each LV peak takes the earliest unmatched
/// SV peak within the lag window.
MatchResult peak_match(const std::vector<double>& lv_peak_times,
                       const std::vector<double>& sv_peak_times, const WaveletConfig& cfg);
MatchResult peak_match(const EnergyProfile& lv, const EnergyProfile& sv, const WaveletConfig& cfg);

struct PairAnalysis {
  EnergyProfile lv;
  EnergyProfile sv;
  MatchResult match;
  bool too_short = false;
};

/// Energy profiles of LV and SV speeds over the pair window, extended by up
/// to ceil(max_scale/dt) samples of context on each side where both
/// trajectories have data; peaks are restricted to the pair window.
PairAnalysis analyze_pair(const CandidatePair& pair, double dt, const WaveletConfig& cfg);

}  // namespace lfforge::wavelet
