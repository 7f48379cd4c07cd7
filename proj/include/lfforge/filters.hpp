#pragma once

#include "lfforge/fdgap.hpp"
#include "lfforge/pairing.hpp"
#include "lfforge/stats.hpp"
#include "lfforge/wavecorr.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lfforge::filters {

/// Stage-1 reason codes, one bit each.
enum Reason : std::uint32_t {
  GAP_BELOW_P5 = 1u << 0,
  GAP_ABOVE_P95 = 1u << 1,
  SPEED_ABOVE_WHISKER = 1u << 2,
  SPEED_BELOW_WHISKER = 1u << 3,
  REL_VEL_EXCESS = 1u << 4,
  LAT_GAP_EXCESS = 1u << 5,
  TAILGATE = 1u << 6,
  FAR_GAP = 1u << 7,
  FD_BAND = 1u << 8,
};
using ReasonMask = std::uint32_t;

inline constexpr ReasonMask kAllReasons = (1u << 9) - 1;
inline constexpr ReasonMask kPercentileReasons =
    GAP_BELOW_P5 | GAP_ABOVE_P95 | SPEED_ABOVE_WHISKER | SPEED_BELOW_WHISKER;
inline constexpr ReasonMask kKinematicReasons = REL_VEL_EXCESS | LAT_GAP_EXCESS | TAILGATE | FAR_GAP;

std::vector<std::string> reason_names(ReasonMask mask);
/// Single reason name, or a '+'-joined list, or one of the groups
/// "all", "percentile", "kinematic", "fd".
ReasonMask parse_reasons(std::string_view spec);

struct ThresholdConfig {
  double rel_vel_abs_max = 2.5;        ///< m/s
  double lat_gap_abs_max = 1.5;        ///< m
  double tailgate_gap = 2.0;           ///< m
  double far_gap = 28.0;               ///< m
  double gap_range_max = 10.0;         ///< m
  double sign_change_ratio_min = 0.3;
  double pct_low = 5.0;
  double pct_high = 95.0;
  double speed_bin_width_kmh = 5.0;
  std::optional<double> gap_bin_width;  ///< m; default: FD slope of the SV class * speed bin width
  double fd_band_low = 0.25;            ///< multiplier on the desirable gap
  double fd_band_high = 4.0;
  std::optional<double> high_speed_kmh;  ///< TAILGATE speed cut; default category Q3
  std::optional<double> moderate_low_kmh, moderate_high_kmh;  ///< FAR_GAP band; default [Q1, Q3]
  ReasonMask stage1_gate = kAllReasons;  ///< reasons that count as outliers when trimming

  void validate() const;
};

struct ThresholdSet {
  ThresholdConfig defaults;
  std::map<std::string, ThresholdConfig> per_category;

  const ThresholdConfig& for_category(const std::string& category) const;
};

struct BinPercentiles {
  double low = 0;
  double high = 0;
  std::size_t count = 0;
};

struct CategoryStats {
  stats::FiveNumber<double> speed_kmh;
  stats::Whiskers<double> speed_whiskers;
  stats::FiveNumber<double> gap;
  stats::Whiskers<double> gap_whiskers;
  double speed_bin_width_kmh = 5;
  double gap_bin_width = 2;
  std::map<long, BinPercentiles> gap_by_speed_bin;  ///< gap percentiles per speed bin
  std::map<long, BinPercentiles> speed_by_gap_bin;  ///< speed percentiles (km/h) per gap bin

  long speed_bin(double speed_kmh) const;
  long gap_bin(double gap) const;
};

/// Box-plot and per-bin percentile statistics of one LF category. Throws
/// DataError for fewer than two samples.
CategoryStats category_stats(std::span<const InteractionSample> samples, const ThresholdConfig& cfg,
                             double gap_bin_width);

/// Per-sample reason masks; every triggered reason is recorded.
std::vector<ReasonMask> flag_stage1(const CandidatePair& pair, const CategoryStats& stats,
                                    const ThresholdConfig& cfg, const fd::FDParams& sv_fd);

struct TrimResult {
  std::optional<CandidatePair> pair;  ///< empty when the survivor is shorter than min_duration
  std::size_t removed_front = 0;
  std::size_t removed_back = 0;
};

/// Drops the maximal flagged prefix and suffix; interior flags are kept.
TrimResult trim_pair(const CandidatePair& pair, const std::vector<bool>& flagged,
                     double min_duration, double dt);

/// |max - min| of a gap series.
template <typename Derived>
typename Derived::Scalar gap_range(const Eigen::DenseBase<Derived>& gaps) {
  if (gaps.size() == 0) throw std::invalid_argument("gap_range of empty series");
  using std::abs;
  return abs(gaps.maxCoeff() - gaps.minCoeff());
}

/// Sign flips of the relative-velocity series over its sample count. Zeros
/// inherit the previous nonzero sign; leading zeros carry no sign.
template <typename Derived>
double sign_change_ratio(const Eigen::DenseBase<Derived>& rel_vel) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = rel_vel.size();
  if (n == 0) throw std::invalid_argument("sign_change_ratio of empty series");
  int prev = 0;
  Eigen::Index changes = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar v = rel_vel(i);
    const int s = v > Scalar(0) ? 1 : (v < Scalar(0) ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return static_cast<double>(changes) / static_cast<double>(n);
}

double gap_range(const CandidatePair& pair);
double sign_change_ratio(const CandidatePair& pair);

struct Stage2Verdict {
  bool remove = false;
  double gap_range = 0;
  double sign_change_ratio = 0;
};

/// Removed iff gap range > gap_range_max and r < sign_change_ratio_min.
Stage2Verdict flag_stage2(const CandidatePair& pair, const ThresholdConfig& cfg);

// ---------------------------------------------------------------------------
// Pipeline

enum class StageKind { Stage1, Stage2, Wavelet };

struct StageDescriptor {
  StageKind kind = StageKind::Stage1;
  std::optional<ReasonMask> gate;       ///< stage1 only; overrides ThresholdConfig::stage1_gate
  std::optional<int> min_matches;       ///< wavelet only
  std::string name;
};

/// "stage1", "stage1:<reasons>", "stage2", "wavelet", "wavelet:<min matches>".
StageDescriptor parse_stage(std::string_view text);
/// "approach1" .. "approach4"; throws ConfigError for unknown names.
std::vector<StageDescriptor> preset(std::string_view name);

struct PipelineInputs {
  ThresholdSet thresholds;
  std::map<VehicleClass, fd::FDParams> fd = fd::default_params();
  wavelet::WaveletConfig wavelet;
  double dt = 0.5;
  double min_duration = 5.0;
};

struct StageCount {
  std::size_t pairs_in = 0, pairs_out = 0, points_in = 0, points_out = 0;
};

struct StageSummary {
  std::string stage;
  StageCount total;
  std::map<std::string, StageCount> by_category;
};

enum class PairStatus { Retained, Trimmed, Removed };
std::string_view to_string(PairStatus s);

struct TrimEvent {
  std::string stage;
  FrameWindow before;
  FrameWindow after;
};

struct FlagRecord {
  double t = 0;
  ReasonMask reasons = 0;
};

struct PairLedger {
  std::string pair_id;
  std::string category;
  PairStatus status = PairStatus::Retained;
  std::string removed_stage;
  std::string removed_reason;
  std::vector<TrimEvent> trims;
  std::vector<FlagRecord> flags;  ///< stage-1 flags (nonzero masks only)
  std::optional<double> gap_range;
  std::optional<double> sign_change_ratio;
  std::optional<int> wavelet_matches;
};

struct FilterOutcome {
  std::vector<StageSummary> stages;
  std::vector<PairLedger> pairs;           ///< input order
  std::vector<CandidatePair> survivors;    ///< input order, trimmed
};

FilterOutcome run_pipeline(std::vector<CandidatePair> pairs, std::span<const StageDescriptor> stages,
                           const PipelineInputs& inputs);

}  // namespace lfforge::filters
