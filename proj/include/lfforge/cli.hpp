#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace lfforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;        ///< schema-invalid config or decisions
inline constexpr int kExitMissingInput = 3;  ///< an upstream artifact is absent

/// An artifact a subcommand depends on has not been produced yet.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  /// ingest, thresholds, pairs, filter, wavelet, eval, dossier, review-apply, synth, report
  std::string command;
  std::filesystem::path config;
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool all = false;
  std::optional<std::filesystem::path> decisions;
};

/// Runs one subcommand and returns its exit status. Progress goes to `out`,
/// diagnostics to `err`. Never throws for configuration or data problems.
int run(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace lfforge::cli
