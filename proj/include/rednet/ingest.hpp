#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rednet/record.hpp"

namespace rednet {

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads a table whose header matches kTableColumns exactly (same names, same
// order). Row errors are rethrown as TableError naming the 1-based data row
// index and the source line.
std::vector<SampleRecord> load_table(const std::string& path);
std::vector<SampleRecord> parse_table(std::istream& in);

void write_table(std::ostream& out, const std::vector<SampleRecord>& records);
void write_table(const std::string& path, const std::vector<SampleRecord>& records);

struct ColumnRange {
  std::size_t n_present = 0;
  // Absent when n_present == 0.
  std::optional<double> min, max, mean, sd;
};

struct RangeSummary {
  // Numeric columns in table order.
  std::vector<std::pair<std::string, ColumnRange>> columns;

  const ColumnRange& at(std::string_view column) const;
};

// Per-column min/max/mean/sample-sd over present values.
RangeSummary summarize_ranges(const std::vector<SampleRecord>& records);

nlohmann::ordered_json to_json(const RangeSummary& s);
RangeSummary range_summary_from_json(const nlohmann::ordered_json& j);

struct SeasonCode {
  double sin_m = 0.0;
  double cos_m = 1.0;
};

// (sin(2*pi*m/12), cos(2*pi*m/12)). Throws std::out_of_range outside 1..12.
SeasonCode season_encode(int month);

// The numeric columns summarized by summarize_ranges, with accessors.
struct NumericColumn {
  std::string_view name;
  OptDouble (*get)(const SampleRecord&);
};
const std::vector<NumericColumn>& numeric_columns();

}  // namespace rednet
