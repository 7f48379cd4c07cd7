#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lfforge {

/// Raised for invalid configuration (bad mapping, schema violations, unknown stage names).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VehicleClass { TW, CAR, HV, LCV, AUTO };

inline constexpr std::array<VehicleClass, 5> kAllClasses = {
    VehicleClass::TW, VehicleClass::CAR, VehicleClass::HV, VehicleClass::LCV,
    VehicleClass::AUTO};

constexpr std::string_view to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::TW: return "TW";
    case VehicleClass::CAR: return "CAR";
    case VehicleClass::HV: return "HV";
    case VehicleClass::LCV: return "LCV";
    case VehicleClass::AUTO: return "AUTO";
  }
  return "?";
}

inline std::optional<VehicleClass> parse_vehicle_class(std::string_view tag) {
  for (auto c : kAllClasses)
    if (to_string(c) == tag) return c;
  return std::nullopt;
}

/// Physical size rank used for the asymmetry grouping: TW < AUTO < CAR < LCV < HV.
constexpr int size_rank(VehicleClass c) {
  switch (c) {
    case VehicleClass::TW: return 0;
    case VehicleClass::AUTO: return 1;
    case VehicleClass::CAR: return 2;
    case VehicleClass::LCV: return 3;
    case VehicleClass::HV: return 4;
  }
  return -1;
}

/// "LV-SV" category label, e.g. "TW-CAR" for a two-wheeler leading a car.
inline std::string category_label(VehicleClass lv, VehicleClass sv) {
  return std::string(to_string(lv)) + "-" + std::string(to_string(sv));
}

constexpr double kmh_to_ms(double v) { return v / 3.6; }
constexpr double ms_to_kmh(double v) { return v * 3.6; }

}  // namespace lfforge
