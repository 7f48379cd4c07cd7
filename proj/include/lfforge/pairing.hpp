#pragma once

#include "lfforge/trajmodel.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lfforge {

struct PairingCriteria {
  double max_gap = 30.0;       ///< m, front bumper of SV to rear of LV
  bool require_overlap = true;
  double min_duration = 5.0;   ///< s, run of n samples lasts (n-1) dt
  // Duplicate leaders resolve to the closest gap; ties go to the smaller id.

  void validate() const;
};

/// State of one vehicle at one grid instant.
struct VehicleState {
  const Vehicle* vehicle = nullptr;
  const TrajectoryPoint* point = nullptr;
};

/// Closest overlapping vehicle strictly ahead within max_gap. A laterally
/// overlapping vehicle whose rear is behind the SV front (gap < 0 with
/// x_LV > x_SV) is a data error: the instant resolves to no leader and
/// `interpenetration` (when given) is set.
std::optional<std::string> resolve_leader(const VehicleState& sv,
                                          std::span<const VehicleState> frame,
                                          const PairingCriteria& criteria,
                                          bool* interpenetration = nullptr);

struct CandidatePair {
  std::string id;  ///< "<lv>-<sv>-<first frame>"
  const Vehicle* lv = nullptr;
  const Vehicle* sv = nullptr;
  FrameWindow window;
  std::vector<InteractionSample> samples;

  std::string category() const { return category_label(lv->cls, sv->cls); }
  double t0() const { return samples.empty() ? 0.0 : samples.front().t; }
  double t1() const { return samples.empty() ? 0.0 : samples.back().t; }
  double duration(double dt) const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) * dt;
  }
};

std::string make_pair_id(const Vehicle& lv, const Vehicle& sv, std::int64_t first_frame);

/// Builds the pair with samples over `window` (throws DataError if not covered).
CandidatePair make_pair(const Vehicle& lv, const Vehicle& sv, FrameWindow window, double dt);

struct PairingDiagnostics {
  std::size_t interpenetration_instants = 0;
};

/// Base LF pairs: per SV, maximal runs of a constant resolved leader lasting
/// at least min_duration. Output sorted by (sv id, window start). The vehicle
/// span must outlive the returned pairs.
std::vector<CandidatePair> extract_pairs(std::span<const Vehicle> vehicles,
                                         const PairingCriteria& criteria, double dt,
                                         PairingDiagnostics* diagnostics = nullptr);

enum class Asymmetry { Symmetric, Positive, Negative };
std::string_view to_string(Asymmetry a);
Asymmetry asymmetry(VehicleClass lv, VehicleClass sv);

struct CategorySummary {
  VehicleClass lv_class{};
  VehicleClass sv_class{};
  std::size_t pairs = 0;
  std::size_t points = 0;
  Asymmetry asym = Asymmetry::Symmetric;
  bool modelable = false;

  std::string label() const { return category_label(lv_class, sv_class); }
};

/// Counts per (LV, SV) category in TW, CAR, HV, LCV, AUTO order of SV then LV.
std::vector<CategorySummary> summarize_pairs(std::span<const CandidatePair> pairs,
                                             std::size_t min_pairs = 20);

}  // namespace lfforge
