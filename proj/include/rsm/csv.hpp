#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rsm {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Parses a full decimal string; throws DomainError on trailing garbage.
double parse_double(std::string_view text);
long parse_long(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep);

/// Minimal comma-separated table: a header row plus data rows. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
};

/// Reads a CSV stream. Blank lines and lines starting with '#' are skipped.
/// Throws IngestionError on ragged rows, naming the 1-based data row.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace rsm
