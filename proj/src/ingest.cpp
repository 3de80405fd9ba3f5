#include "rednet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rednet/csv.hpp"
#include "rednet/stats.hpp"

namespace rednet {

const std::vector<NumericColumn>& numeric_columns() {
  static const std::vector<NumericColumn> cols{
      {"chlor_a", [](const SampleRecord& r) { return r.chlor_a; }},
      {"kd490", [](const SampleRecord& r) { return r.kd490; }},
      {"nflh", [](const SampleRecord& r) { return r.nflh; }},
      {"sst", [](const SampleRecord& r) { return r.sst; }},
      {"fai_mean", [](const SampleRecord& r) { return r.fai_mean; }},
      {"ndwi_mean", [](const SampleRecord& r) { return r.ndwi_mean; }},
      {"rednir_mean", [](const SampleRecord& r) { return r.rednir_mean; }},
      {"det_mean", [](const SampleRecord& r) { return r.det_mean; }},
      {"hab_prob", [](const SampleRecord& r) { return r.hab_prob; }},
  };
  return cols;
}

std::vector<SampleRecord> parse_table(std::istream& in) {
  csv::Table t;
  try {
    t = csv::read(in);
  } catch (const std::runtime_error& e) {
    throw TableError(e.what());
  }
  bool header_ok = t.header.size() == kTableColumns.size();
  for (std::size_t i = 0; header_ok && i < kTableColumns.size(); ++i) {
    header_ok = t.header[i] == kTableColumns[i];
  }
  if (!header_ok) {
    std::string expected;
    for (auto c : kTableColumns) expected += (expected.empty() ? "" : ",") + std::string(c);
    throw TableError("header mismatch: expected '" + expected + "'");
  }

  std::vector<SampleRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    RawRecord raw;
    for (std::size_t c = 0; c < t.header.size(); ++c) raw[t.header[c]] = t.rows[i][c];
    try {
      out.push_back(validate_record(raw));
    } catch (const ValidationError& e) {
      throw TableError("row " + std::to_string(i + 1) + " (line " + std::to_string(t.line_numbers[i]) +
                       "): " + e.what());
    }
  }
  return out;
}

std::vector<SampleRecord> load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open " + path);
  return parse_table(in);
}

void write_table(std::ostream& out, const std::vector<SampleRecord>& records) {
  std::vector<std::string> cells(kTableColumns.begin(), kTableColumns.end());
  csv::write_row(out, cells);
  for (const auto& r : records) {
    auto raw = serialize_record(r);
    for (std::size_t c = 0; c < kTableColumns.size(); ++c) cells[c] = raw.find(kTableColumns[c])->second;
    csv::write_row(out, cells);
  }
}

void write_table(const std::string& path, const std::vector<SampleRecord>& records) {
  std::ofstream out(path);
  if (!out) throw TableError("cannot write " + path);
  write_table(out, records);
}

const ColumnRange& RangeSummary::at(std::string_view column) const {
  for (const auto& [name, range] : columns) {
    if (name == column) return range;
  }
  throw std::out_of_range("no such column: " + std::string(column));
}

RangeSummary summarize_ranges(const std::vector<SampleRecord>& records) {
  RangeSummary s;
  std::vector<double> values;
  for (const auto& col : numeric_columns()) {
    values.clear();
    for (const auto& r : records) {
      if (auto v = col.get(r)) values.push_back(*v);
    }
    ColumnRange cr;
    cr.n_present = values.size();
    if (!values.empty()) {
      // Sorting first makes the sums independent of row order.
      auto sorted = stats::sorted_copy(values);
      cr.min = sorted.front();
      cr.max = sorted.back();
      cr.mean = std::clamp(stats::mean(sorted), sorted.front(), sorted.back());
      cr.sd = stats::sample_sd(sorted);
    }
    s.columns.emplace_back(std::string(col.name), cr);
  }
  return s;
}

nlohmann::ordered_json to_json(const RangeSummary& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, cr] : s.columns) {
    nlohmann::ordered_json c;
    auto put = [&](const char* key, const std::optional<double>& v) {
      c[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    put("min", cr.min);
    put("max", cr.max);
    put("mean", cr.mean);
    put("sd", cr.sd);
    c["n_present"] = cr.n_present;
    j[name] = std::move(c);
  }
  return j;
}

RangeSummary range_summary_from_json(const nlohmann::ordered_json& j) {
  RangeSummary s;
  for (const auto& [name, c] : j.items()) {
    ColumnRange cr;
    cr.n_present = c.at("n_present").get<std::size_t>();
    auto get = [&](const char* key) -> std::optional<double> {
      if (!c.contains(key) || c.at(key).is_null()) return std::nullopt;
      return c.at(key).get<double>();
    };
    cr.min = get("min");
    cr.max = get("max");
    cr.mean = get("mean");
    cr.sd = get("sd");
    s.columns.emplace_back(name, cr);
  }
  return s;
}

SeasonCode season_encode(int month) {
  if (month < 1 || month > 12) throw std::out_of_range("month out of range: " + std::to_string(month));
  // Exact values at the quarter points; std::sin(pi) is not exactly zero.
  switch (month) {
    case 3: return {1.0, 0.0};
    case 6: return {0.0, -1.0};
    case 9: return {-1.0, 0.0};
    case 12: return {0.0, 1.0};
    default: break;
  }
  double angle = 2.0 * std::numbers::pi * month / 12.0;
  return {std::sin(angle), std::cos(angle)};
}

}  // namespace rednet
