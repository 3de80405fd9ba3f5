#include "rednet/record.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <system_error>

namespace rednet {

namespace {

int parse_int_field(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("unparseable " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s, std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError("column " + std::string(column) + ": unparseable number '" +
                          std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::string_view> cell(const RawRecord& raw, std::string_view key) {
  auto it = raw.find(key);
  if (it == raw.end()) return std::nullopt;
  auto v = trim(it->second);
  if (v.empty()) return std::nullopt;
  return v;
}

OptDouble numeric(const RawRecord& raw, std::string_view key) {
  auto c = cell(raw, key);
  if (!c) return std::nullopt;
  return parse_double(*c, key);
}

OptDouble zero_is_missing(OptDouble v) {
  if (v && *v == 0.0) return std::nullopt;
  return v;
}

OptDouble probability(const RawRecord& raw, std::string_view key) {
  auto v = numeric(raw, key);
  if (v && (*v < 0.0 || *v > 1.0)) {
    throw ValidationError("column " + std::string(key) + ": probability out of range: " +
                          format_number(*v));
  }
  return v;
}

OptLabel label(const RawRecord& raw, std::string_view key) {
  auto c = cell(raw, key);
  if (!c) return std::nullopt;
  // Accept "1", "0", "1.0", "0.0".
  double v = parse_double(*c, key);
  if (v != 0.0 && v != 1.0) {
    throw ValidationError("column " + std::string(key) + ": label must be 0 or 1, got '" +
                          std::string(*c) + "'");
  }
  return static_cast<int>(v);
}

std::string required(const RawRecord& raw, std::string_view key) {
  auto c = cell(raw, key);
  if (!c) throw ValidationError("missing mandatory field: " + std::string(key));
  return std::string(*c);
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ValidationError("unparseable date: '" + std::string(text) + "'");
  }
  int y = parse_int_field(text.substr(0, 4), "year");
  int m = parse_int_field(text.substr(5, 2), "month");
  int d = parse_int_field(text.substr(8, 2), "day");
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ValidationError("invalid calendar date: '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int month_of(Date d) { return static_cast<int>(static_cast<unsigned>(std::chrono::year_month_day{d}.month())); }

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

std::string_view to_string(AlertState s) {
  switch (s) {
    case AlertState::NORMAL: return "NORMAL";
    case AlertState::WATCH: return "WATCH";
    case AlertState::ACTION: return "ACTION";
  }
  return "NORMAL";
}

AlertState parse_alert_state(std::string_view text) {
  if (text == "NORMAL") return AlertState::NORMAL;
  if (text == "WATCH") return AlertState::WATCH;
  if (text == "ACTION") return AlertState::ACTION;
  throw ValidationError("unknown alert state: '" + std::string(text) + "'");
}

std::string_view driver_name(Driver d) {
  switch (d) {
    case Driver::ChlorA: return "chlor_a";
    case Driver::Nflh: return "nflh";
    case Driver::Kd490: return "kd490";
    case Driver::Sst: return "sst";
  }
  return "";
}

OptDouble SampleRecord::driver(Driver d) const {
  switch (d) {
    case Driver::ChlorA: return chlor_a;
    case Driver::Nflh: return nflh;
    case Driver::Kd490: return kd490;
    case Driver::Sst: return sst;
  }
  return std::nullopt;
}

OptDouble& SampleRecord::driver(Driver d) {
  switch (d) {
    case Driver::ChlorA: return chlor_a;
    case Driver::Nflh: return nflh;
    case Driver::Kd490: return kd490;
    case Driver::Sst: break;
  }
  return sst;
}

SampleRecord validate_record(const RawRecord& raw) {
  SampleRecord r;
  r.plant_id = required(raw, "plant_id");
  r.timestamp = parse_date(required(raw, "timestamp"));
  r.month = month_of(r.timestamp);
  r.group_key = required(raw, "group_key");

  r.chlor_a = zero_is_missing(numeric(raw, "chlor_a"));
  r.kd490 = zero_is_missing(numeric(raw, "kd490"));
  r.nflh = zero_is_missing(numeric(raw, "nflh"));
  r.sst = numeric(raw, "sst");
  r.fai_mean = numeric(raw, "fai_mean");
  r.ndwi_mean = numeric(raw, "ndwi_mean");
  r.rednir_mean = numeric(raw, "rednir_mean");
  r.det_mean = probability(raw, "det_mean");
  r.hab_prob = probability(raw, "hab_prob");

  r.y_trusted = label(raw, "y_trusted");
  r.y_weak = label(raw, "y_weak");
  r.y_final = label(raw, "y_final");
  return r;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

RawRecord serialize_record(const SampleRecord& r) {
  auto num = [](const OptDouble& v) { return v ? format_number(*v) : std::string{}; };
  auto lab = [](const OptLabel& v) { return v ? std::to_string(*v) : std::string{}; };
  RawRecord out;
  out["plant_id"] = r.plant_id;
  out["timestamp"] = format_date(r.timestamp);
  out["group_key"] = r.group_key;
  out["chlor_a"] = num(r.chlor_a);
  out["kd490"] = num(r.kd490);
  out["nflh"] = num(r.nflh);
  out["sst"] = num(r.sst);
  out["fai_mean"] = num(r.fai_mean);
  out["ndwi_mean"] = num(r.ndwi_mean);
  out["rednir_mean"] = num(r.rednir_mean);
  out["det_mean"] = num(r.det_mean);
  out["hab_prob"] = num(r.hab_prob);
  out["y_trusted"] = lab(r.y_trusted);
  out["y_weak"] = lab(r.y_weak);
  out["y_final"] = lab(r.y_final);
  return out;
}

}  // namespace rednet
