#pragma once

#include "lfforge/trajmodel.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lfforge::review {

enum class Action { Keep, Remove, Trim };

struct Decision {
  std::string pair_id;
  Action action = Action::Keep;
  std::vector<std::pair<double, double>> trim_windows;  ///< absolute seconds, half-open [t0, t1)
  std::string note;
};

/// One row of retained_pairs.csv.
struct RetainedEntry {
  std::string pair_id;
  std::string lv_id;
  std::string sv_id;
  std::string category;
  FrameWindow window;
};

/// Schema check plus the invariants the schema cannot express: t0 <= t1,
/// windows inside the base pair window, no overlaps, windows only on trim.
/// `base_windows` maps every known pair id to its extracted window. Throws
/// config::SchemaError with the path of the first problem.
std::vector<Decision> parse_decisions(const nlohmann::json& doc,
                                      const std::map<std::string, FrameWindow>& base_windows, double dt);

struct LogEntry {
  std::string pair_id;
  std::string action;
  std::string outcome;  ///< kept, removed, trimmed, removed_too_short, not_retained
  std::string note;
};

struct ApplyResult {
  std::vector<RetainedEntry> retained;
  std::vector<LogEntry> log;
};

/// Removes samples inside trim windows and keeps the longest remaining
/// contiguous run (earliest on ties); runs shorter than min_duration drop the
/// pair. Decisions on different pairs are independent, so order across pair
/// ids does not matter.
ApplyResult apply(std::vector<RetainedEntry> retained, std::span<const Decision> decisions, double dt,
                  double min_duration);

void write_retained_csv(std::ostream& out, std::span<const RetainedEntry> rows, double dt);
std::vector<RetainedEntry> read_retained_csv(std::istream& in);

}  // namespace lfforge::review
