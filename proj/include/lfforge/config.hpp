#pragma once

#include "lfforge/fdgap.hpp"
#include "lfforge/filters.hpp"
#include "lfforge/pairing.hpp"
#include "lfforge/synthgen.hpp"
#include "lfforge/trajmodel.hpp"
#include "lfforge/wavecorr.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lfforge::config {

/// Configuration error tied to a location in the config document.
class SchemaError : public ConfigError {
 public:
  SchemaError(std::string path, const std::string& message)
      : ConfigError((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct EvalSettings {
  double tau = 0.5;
  int k = 5;
  std::uint64_t seed = 42;
};

struct SynthSettings {
  std::uint64_t seed = 7;
  std::map<synth::Label, std::size_t> counts;  ///< default: 50 of every label
  synth::SynthConfig generator;
};

struct RunConfig {
  double dt = 0.5;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> ingest_source;
  IngestOptions ingest;
  std::map<VehicleClass, fd::FDParams> fd = fd::default_params();
  std::vector<double> table_speeds_kmh;
  PairingCriteria pairing;
  filters::ThresholdSet thresholds;
  wavelet::WaveletConfig wavelet;
  std::string preset = "approach4";
  std::vector<filters::StageDescriptor> stages;
  EvalSettings eval;
  SynthSettings synth;
  std::optional<double> oblique_reference_speed;
  nlohmann::json document;  ///< the config as loaded, before CLI overrides

  /// Sets the stage list from a preset name.
  void use_preset(std::string_view name);
};

const nlohmann::json& runconfig_schema();
const nlohmann::json& pair_dossier_schema();
const nlohmann::json& review_decision_schema();

/// Schema check, then conversion and semantic checks. Relative paths are
/// resolved against `base_dir`. Throws SchemaError naming the offending field.
RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads and parses the file; a missing or unparsable file is a SchemaError at "/".
RunConfig load(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);
/// Hash of the compact, key-sorted serialization of the document.
std::string config_hash(const nlohmann::json& doc);

}  // namespace lfforge::config
