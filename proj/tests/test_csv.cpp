#include "lfforge/csv.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lfforge;

TEST_CASE("quoted fields round-trip") {
  std::ostringstream out;
  csv::write_row(out, {"a", "b,c", "say \"hi\"", ""});
  std::istringstream in("h1,h2,h3,h4\n" + out.str());
  csv::Reader r(in);
  std::vector<std::string> f;
  REQUIRE(r.next(f));
  CHECK(f == std::vector<std::string>{"a", "b,c", "say \"hi\"", ""});
  CHECK_FALSE(r.next(f));
}

TEST_CASE("number formatting is fixed at six significant digits") {
  CHECK(csv::format_double(1.0) == "1");
  CHECK(csv::format_double(-0.0) == "0");
  CHECK(csv::format_double(3.14159265) == "3.14159");
  CHECK(csv::format_double(1234567.0) == "1.23457e+06");
  CHECK(csv::parse_double("2.5").value() == 2.5);
  CHECK_FALSE(csv::parse_double("2.5x"));
  CHECK_FALSE(csv::parse_double(""));
}

TEST_CASE("atomic write leaves only the final file") {
  const auto dir = std::filesystem::temp_directory_path() / "lfforge_csv_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  csv::write_file_atomic(dir / "x.csv", [](std::ostream& o) { o << "a\n1\n"; });
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  std::ifstream in(dir / "x.csv");
  std::string s((std::istreambuf_iterator<char>(in)), {});
  CHECK(s == "a\n1\n");
  std::filesystem::remove_all(dir);
}
