#include "lfforge/wavecorr.hpp"

#include <algorithm>
#include <string>

namespace lfforge::wavelet {

std::string_view to_string(Signal s) {
  return s == Signal::SpeedChange ? "speed_change" : "speed";
}

Signal parse_signal(std::string_view s) {
  if (s == "speed_change") return Signal::SpeedChange;
  if (s == "speed") return Signal::Speed;
  throw ConfigError("unknown wavelet signal '" + std::string(s) + "'");
}

void WaveletConfig::validate() const {
  if (scales.empty()) throw ConfigError("wavelet.scales must not be empty");
  for (double a : scales)
    if (!(a > 0)) throw ConfigError("wavelet scales must be positive");
  if (!(max_lag >= 0)) throw ConfigError("wavelet.max_lag must be >= 0");
  if (min_matches < 1) throw ConfigError("wavelet.min_matches must be >= 1");
  if (!(prominence_frac > 0 && prominence_frac <= 1))
    throw ConfigError("wavelet.prominence_frac must be in (0, 1]");
}

double WaveletConfig::max_scale() const { return *std::max_element(scales.begin(), scales.end()); }

std::vector<double> EnergyProfile::peak_times() const {
  std::vector<double> out;
  out.reserve(peaks.size());
  for (auto i : peaks) out.push_back(t(i));
  return out;
}

std::vector<Eigen::Index> find_peaks(const Eigen::VectorXd& e, Eigen::Index first,
                                     Eigen::Index last, double prominence_frac) {
  std::vector<Eigen::Index> out;
  // Bases are searched over the whole region; peaks need a neighbour on each side.
  const Eigen::Index lo = std::max<Eigen::Index>(first, 0);
  const Eigen::Index hi = std::min<Eigen::Index>(last, e.size() - 1);
  if (hi - lo < 2) return out;
  const double top = e.segment(lo, hi - lo + 1).maxCoeff();
  if (!(top > 0)) return out;
  const double need = prominence_frac * top;
  for (Eigen::Index i = lo + 1; i < hi; ++i) {
    if (!(e(i) > e(i - 1)) || e(i) < e(i + 1)) continue;
    // Plateau: the peak is its first sample, and the plateau must descend on the right.
    Eigen::Index r = i;
    while (r < hi && e(r + 1) == e(i)) ++r;
    if (r == hi || e(r + 1) > e(i)) continue;
    double left_min = e(i);
    for (Eigen::Index k = i - 1; k >= lo && e(k) <= e(i); --k) left_min = std::min(left_min, e(k));
    double right_min = e(i);
    for (Eigen::Index k = r + 1; k <= hi && e(k) <= e(i); ++k) right_min = std::min(right_min, e(k));
    if (e(i) - std::max(left_min, right_min) >= need) out.push_back(i);
  }
  return out;
}

EnergyProfile cwt_energy(const Eigen::VectorXd& speed, double t0, double dt,
                         const WaveletConfig& cfg) {
  cfg.validate();
  const double amax = cfg.max_scale();
  const auto n = speed.size();
  const auto need = static_cast<Eigen::Index>(std::ceil(2.0 * amax / dt - 1e-9));
  if (n < need || n < 3)
    throw DataError("series of " + std::to_string(n) + " samples is shorter than the " +
                    std::to_string(need) + " the largest wavelet scale requires");

  const Eigen::VectorXd input =
      cfg.signal == Signal::SpeedChange ? finite_difference(speed, dt) : speed;
  EnergyProfile p;
  p.t0 = t0;
  p.dt = dt;
  p.energy = Eigen::VectorXd::Zero(n);
  for (double a : cfg.scales) p.energy += cwt_coefficients(input, dt, a).array().square().matrix();
  const auto edge = static_cast<Eigen::Index>(std::ceil(amax / dt - 1e-9));
  p.detect_first = edge;
  p.detect_last = n - 1 - edge;
  p.peaks = find_peaks(p.energy, p.detect_first, p.detect_last, cfg.prominence_frac);
  return p;
}

MatchResult peak_match(const std::vector<double>& lv, const std::vector<double>& sv,
                       const WaveletConfig& cfg) {
  constexpr double kEps = 1e-9;
  MatchResult r;
  std::vector<bool> used(sv.size(), false);
  for (double tl : lv) {
    for (std::size_t j = 0; j < sv.size(); ++j) {
      if (used[j]) continue;
      const double lag = sv[j] - tl;
      const bool ok = cfg.symmetric_lag ? std::abs(lag) <= cfg.max_lag + kEps
                                        : lag >= -kEps && lag <= cfg.max_lag + kEps;
      if (ok) {
        used[j] = true;
        r.pairs.emplace_back(tl, sv[j]);
        break;
      }
    }
  }
  r.count = static_cast<int>(r.pairs.size());
  r.matched = r.count >= cfg.min_matches;
  return r;
}

MatchResult peak_match(const EnergyProfile& lv, const EnergyProfile& sv, const WaveletConfig& cfg) {
  return peak_match(lv.peak_times(), sv.peak_times(), cfg);
}

namespace {

EnergyProfile crop(const EnergyProfile& full, Eigen::Index offset, Eigen::Index n) {
  EnergyProfile p;
  p.dt = full.dt;
  p.t0 = full.t(offset);
  p.energy = full.energy.segment(offset, n);
  p.detect_first = std::max<Eigen::Index>(0, full.detect_first - offset);
  p.detect_last = std::min<Eigen::Index>(n - 1, full.detect_last - offset);
  for (auto i : full.peaks)
    if (i >= offset && i < offset + n) p.peaks.push_back(i - offset);
  return p;
}

}  // namespace

PairAnalysis analyze_pair(const CandidatePair& pair, double dt, const WaveletConfig& cfg) {
  cfg.validate();
  PairAnalysis out;
  const auto pad = static_cast<std::int64_t>(std::ceil(cfg.max_scale() / dt - 1e-9));
  const auto first = std::max({pair.window.first - pad, pair.lv->first_frame, pair.sv->first_frame});
  const auto last = std::min({pair.window.last + pad, pair.lv->last_frame(), pair.sv->last_frame()});
  const auto n = static_cast<Eigen::Index>(last - first + 1);
  Eigen::VectorXd lv_speed(n), sv_speed(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lv_speed(i) = pair.lv->at_frame(first + i).v_long;
    sv_speed(i) = pair.sv->at_frame(first + i).v_long;
  }
  const double t0 = static_cast<double>(first) * dt;
  const auto offset = static_cast<Eigen::Index>(pair.window.first - first);
  const auto len = static_cast<Eigen::Index>(pair.window.size());
  try {
    out.lv = crop(cwt_energy(lv_speed, t0, dt, cfg), offset, len);
    out.sv = crop(cwt_energy(sv_speed, t0, dt, cfg), offset, len);
  } catch (const DataError&) {
    out.too_short = true;
    out.lv = EnergyProfile{pair.t0(), dt, Eigen::VectorXd::Zero(len), {}, 0, -1};
    out.sv = out.lv;
    return out;
  }
  out.match = peak_match(out.lv, out.sv, cfg);
  return out;
}

}  // namespace lfforge::wavelet
