#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lfforge::csv {

/// Minimal RFC-4180 reader: comma separated, optional double-quoted fields.
class Reader {
 public:
  explicit Reader(std::istream& in);

  const std::vector<std::string>& header() const { return header_; }
  std::optional<std::size_t> column(std::string_view name) const;

  /// Next data row; false at end of stream. Blank lines are skipped.
  bool next(std::vector<std::string>& fields);
  /// 1-based line number of the row most recently returned by next().
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

std::vector<std::string> split_line(std::string_view line);

std::optional<double> parse_double(std::string_view s);

/// Six significant digits, as printed by %.6g; negative zero prints as 0.
std::string format_double(double v);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Writes the file through a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace lfforge::csv
