#pragma once

// Shared record types for the HAB decision layer.
//
// Missing values are std::optional, never sentinel numbers. Zero values in
// chlor_a, kd490 and nflh are upstream placeholders and become missing at
// validation time; sst and det_mean zeros are kept.

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rednet {

using Date = std::chrono::sys_days;
using OptDouble = std::optional<double>;
using OptLabel = std::optional<int>;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses YYYY-MM-DD. Throws ValidationError on malformed or impossible dates.
Date parse_date(std::string_view text);
std::string format_date(Date d);
int month_of(Date d);
int year_of(Date d);

enum class AlertState : std::uint8_t { NORMAL = 0, WATCH = 1, ACTION = 2 };

std::string_view to_string(AlertState s);
AlertState parse_alert_state(std::string_view text);

enum class Driver : std::uint8_t { ChlorA = 0, Nflh = 1, Kd490 = 2, Sst = 3 };
inline constexpr std::array<Driver, 4> kDrivers{Driver::ChlorA, Driver::Nflh,
                                                Driver::Kd490, Driver::Sst};
std::string_view driver_name(Driver d);

struct SampleRecord {
  std::string plant_id;
  Date timestamp{};
  int month = 1;
  std::string group_key;

  OptDouble chlor_a;
  OptDouble kd490;
  OptDouble nflh;
  OptDouble sst;
  OptDouble fai_mean;
  OptDouble ndwi_mean;
  OptDouble rednir_mean;
  OptDouble det_mean;
  OptDouble hab_prob;

  OptLabel y_trusted;
  OptLabel y_weak;
  OptLabel y_final;

  OptDouble driver(Driver d) const;
  OptDouble& driver(Driver d);

  bool operator==(const SampleRecord&) const = default;
};

// Per-record label view used by label mining.
struct LabelSet {
  OptLabel y_trusted;
  OptLabel y_weak;
  OptLabel y_final;
  double h_score = 0.0;
  bool quality_pass = false;
};

// Column order of the table schema. Header names must match exactly.
inline constexpr std::array<std::string_view, 15> kTableColumns{
    "plant_id", "timestamp", "group_key", "chlor_a",     "kd490",
    "nflh",     "sst",       "fai_mean",  "ndwi_mean",   "rednir_mean",
    "det_mean", "hab_prob",  "y_trusted", "y_weak",      "y_final"};

using RawRecord = std::map<std::string, std::string, std::less<>>;

// Builds a SampleRecord from string cells. Empty or absent optional cells are
// missing. Throws ValidationError on a missing mandatory key, an unparseable
// date or number, a probability outside [0,1], or a label outside {0,1}.
SampleRecord validate_record(const RawRecord& raw);

// Inverse of validate_record: cells in kTableColumns order, shortest
// round-trip number formatting, empty string for missing.
RawRecord serialize_record(const SampleRecord& r);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

}  // namespace rednet
