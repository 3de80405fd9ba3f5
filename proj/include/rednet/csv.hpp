#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rednet::csv {

// Minimal RFC-4180 style splitting: commas, optional double-quoted cells,
// doubled quotes inside quoted cells.
std::vector<std::string> split_line(std::string_view line);

std::string quote_if_needed(std::string_view cell);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number in the source file for each row (header is line 1).
  std::vector<std::size_t> line_numbers;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

// Reads a whole CSV stream. Blank lines are skipped. Throws std::runtime_error
// when a row's cell count differs from the header's.
Table read(std::istream& in);
Table read_file(const std::string& path);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace rednet::csv
