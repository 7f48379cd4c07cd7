#pragma once

#include "lfforge/fdgap.hpp"
#include "lfforge/trajmodel.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lfforge::synth {

enum class Label { FOLLOWING, OVERTAKING, TAILGATING, APPROACH_ONLY, DIVERGE_ONLY, INDEPENDENT };

inline constexpr std::array<Label, 6> kAllLabels = {Label::FOLLOWING,     Label::OVERTAKING,
                                                    Label::TAILGATING,    Label::APPROACH_ONLY,
                                                    Label::DIVERGE_ONLY,  Label::INDEPENDENT};

std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

struct Range {
  double lo = 0;
  double hi = 0;
};

/// Label-specific parameter ranges. Speeds in km/h, gaps in m, times in s.
struct SynthConfig {
  double dt = 0.5;
  int substeps = 10;              ///< kinematics integrated at dt / substeps
  double lane_spacing = 10.0;     ///< lateral offset between independent scenes
  Range cruise_kmh{25, 40};
  Range duration{30, 36};
  double accel_noise = 0.03;      ///< OU acceleration noise amplitude, m/s^2
  // FOLLOWING
  Range follow_reaction{0.3, 0.7};   ///< s
  Range follow_rel_gain{0.8, 1.2};   ///< 1/s
  Range follow_gap_gain{0.03, 0.08}; ///< 1/s^2
  Range follow_event_dv{1.0, 2.0};   ///< m/s, magnitude of LV speed changes
  // OVERTAKING
  Range overtake_rel_speed{3.0, 4.0};  ///< m/s, SV faster
  Range overtake_gap_start{26, 29};
  Range overtake_gap_end{2, 4};
  double overtake_lateral_end = 1.7;   ///< m, SV drift (overlap stays positive for cars)
  // TAILGATING
  Range tailgate_kmh{42, 50};
  Range tailgate_gap{1.2, 1.6};
  // APPROACH_ONLY / DIVERGE_ONLY
  Range monotone_far_gap{22, 25};
  Range monotone_near_gap{5, 7};
  // INDEPENDENT
  Range independent_dv{1.0, 1.5};
  double independent_separation = 6.0;  ///< s between the two vehicles' speed events

  /// Throws ConfigError for empty/inverted ranges and ranges that cannot
  /// produce their label (e.g. a tailgating gap of 2 m or more).
  void validate() const;
};

struct SynthPair {
  Vehicle lv;
  Vehicle sv;
  Label label = Label::FOLLOWING;
};

/// One scene: two CAR vehicles on lane `lane`, ids 2 lane + 1 (LV) and 2 lane + 2 (SV).
SynthPair gen_pair(Label label, const fd::FDParams& fd, std::uint64_t seed, std::size_t lane,
                   const SynthConfig& cfg = {});

struct GroundTruth {
  std::string lv_id;
  std::string sv_id;
  Label label = Label::FOLLOWING;
};

struct Suite {
  std::vector<Vehicle> vehicles;  ///< sorted by id_less
  std::vector<GroundTruth> truth;
};

/// Pairs in label order; pair k uses a seed derived from (seed, k).
Suite gen_suite(const std::map<Label, std::size_t>& counts, std::uint64_t seed,
                const fd::FDParams& fd, const SynthConfig& cfg = {});

/// Re-checks the defining inequalities of the label from raw trajectories.
/// Returns the violated constraints; empty means the pair is valid.
std::vector<std::string> validate_pair(const Vehicle& lv, const Vehicle& sv, Label label,
                                       const fd::FDParams& fd, double dt);

}  // namespace lfforge::synth
