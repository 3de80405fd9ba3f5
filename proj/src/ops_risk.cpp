#include "rednet/ops_risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rednet/csv.hpp"
#include "rednet/stats.hpp"

namespace rednet {

void OpsRiskConfig::check() const {
  double dw = 0.0;
  for (double w : driver_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("driver weights must be non-negative");
    dw += w;
  }
  if (std::abs(dw - 1.0) > 1e-9) throw std::invalid_argument("driver weights must sum to 1");
  const double bw = blend.hab_prob + blend.det_mean + blend.oci_adj + blend.season_adj;
  if (std::abs(bw - 1.0) > 1e-9) throw std::invalid_argument("blend weights must sum to 1");
  if (!(discount_floor < 1.0) || !(discount_floor >= 0.0)) throw std::invalid_argument("discount floor must be in [0,1)");
  if (!(watch_bounds.lo <= watch_bounds.hi) || !(action_bounds.lo <= action_bounds.hi)) {
    throw std::invalid_argument("threshold bounds must be ordered");
  }
  if (!(min_gap >= 0.0)) throw std::invalid_argument("min_gap must be non-negative");
  if (!(norm_q_lo < norm_q_hi)) throw std::invalid_argument("normalization quantiles must be ordered");
}

nlohmann::ordered_json to_json(const OpsRiskConfig& c) {
  nlohmann::ordered_json j;
  j["driver_weights"] = {{"chlor_a", c.weight(Driver::ChlorA)},
                         {"nflh", c.weight(Driver::Nflh)},
                         {"kd490", c.weight(Driver::Kd490)},
                         {"sst", c.weight(Driver::Sst)}};
  j["blend_weights"] = {{"hab_prob", c.blend.hab_prob},
                        {"det_mean", c.blend.det_mean},
                        {"oci_adj", c.blend.oci_adj},
                        {"season_adj", c.blend.season_adj}};
  j["discount_slope"] = c.discount_slope;
  j["discount_floor"] = c.discount_floor;
  j["sigmoid_slope"] = c.sigmoid_slope;
  j["z_clip"] = c.z_clip;
  j["norm_quantiles"] = {c.norm_q_lo, c.norm_q_hi};
  j["base_watch"] = c.base_watch;
  j["base_action"] = c.base_action;
  j["min_gap"] = c.min_gap;
  j["watch_bounds"] = {c.watch_bounds.lo, c.watch_bounds.hi};
  j["action_bounds"] = {c.action_bounds.lo, c.action_bounds.hi};
  return j;
}

OpsRiskConfig ops_risk_config_from_json(const nlohmann::ordered_json& j) {
  OpsRiskConfig c;
  if (j.contains("driver_weights")) {
    const auto& w = j.at("driver_weights");
    for (Driver d : kDrivers) {
      c.driver_weights[static_cast<int>(d)] = w.value(std::string(driver_name(d)), c.weight(d));
    }
  }
  if (j.contains("blend_weights")) {
    const auto& b = j.at("blend_weights");
    c.blend.hab_prob = b.value("hab_prob", c.blend.hab_prob);
    c.blend.det_mean = b.value("det_mean", c.blend.det_mean);
    c.blend.oci_adj = b.value("oci_adj", c.blend.oci_adj);
    c.blend.season_adj = b.value("season_adj", c.blend.season_adj);
  }
  c.discount_slope = j.value("discount_slope", c.discount_slope);
  c.discount_floor = j.value("discount_floor", c.discount_floor);
  c.sigmoid_slope = j.value("sigmoid_slope", c.sigmoid_slope);
  c.z_clip = j.value("z_clip", c.z_clip);
  if (j.contains("norm_quantiles")) {
    c.norm_q_lo = j.at("norm_quantiles").at(0).get<double>();
    c.norm_q_hi = j.at("norm_quantiles").at(1).get<double>();
  }
  c.base_watch = j.value("base_watch", c.base_watch);
  c.base_action = j.value("base_action", c.base_action);
  c.min_gap = j.value("min_gap", c.min_gap);
  if (j.contains("watch_bounds")) {
    c.watch_bounds = {j.at("watch_bounds").at(0).get<double>(), j.at("watch_bounds").at(1).get<double>()};
  }
  if (j.contains("action_bounds")) {
    c.action_bounds = {j.at("action_bounds").at(0).get<double>(), j.at("action_bounds").at(1).get<double>()};
  }
  c.check();
  return c;
}

double normalize_driver(double x, const QuantileRange& q) {
  if (!(q.q90 > q.q10)) return 0.5;
  return std::clamp((x - q.q10) / (q.q90 - q.q10), 0.0, 1.0);
}

namespace {

Composite aggregate(const DriverValues& values, const OpsRiskConfig& cfg) {
  double num = 0.0, avail = 0.0, total = 0.0;
  for (Driver d : kDrivers) {
    const double w = cfg.weight(d);
    total += w;
    if (const auto& v = values[static_cast<int>(d)]) {
      num += w * *v;
      avail += w;
    }
  }
  Composite c;
  if (avail <= 0.0 || total <= 0.0) return c;  // coverage 0, adjusted exactly 0.5
  c.raw = num / avail;
  c.coverage = avail / total;
  c.adjusted = std::clamp(*c.raw * c.coverage + 0.5 * (1.0 - c.coverage), 0.0, 1.0);
  return c;
}

}  // namespace

Composite compute_oci(const DriverValues& normalized, const OpsRiskConfig& cfg) {
  return aggregate(normalized, cfg);
}

std::optional<double> seasonal_score(std::optional<double> x, int month, const NormStats& stats, Driver driver,
                                     const OpsRiskConfig& cfg) {
  if (!x) return std::nullopt;
  const auto& cell = stats.monthly.cell(driver, month);
  if (!cell) return std::nullopt;
  double z = std::clamp(anomaly_z(*x, *cell), -cfg.z_clip, cfg.z_clip);
  if (driver == Driver::Sst) z = std::max(z, 0.0);
  return stats::logistic(cfg.sigmoid_slope * z);
}

Composite season_adj(const DriverValues& scores, const OpsRiskConfig& cfg) { return aggregate(scores, cfg); }

OpsRiskRow blend_and_discount(std::optional<double> hab_prob, std::optional<double> det_mean, double oci_adj,
                              double season_adj, const OpsRiskConfig& cfg) {
  OpsRiskRow row;
  row.oci_adj = oci_adj;
  row.season_adj = season_adj;
  if (hab_prob && det_mean) {
    const auto& w = cfg.blend;
    const double h = *hab_prob;
    // Anchored at hab_prob: equal to the plain weighted sum because the blend
    // weights sum to 1, and exact when all inputs coincide.
    const double b = h + w.det_mean * (*det_mean - h) + w.oci_adj * (oci_adj - h) + w.season_adj * (season_adj - h);
    const double d = std::clamp(1.0 - cfg.discount_slope * std::abs(h - *det_mean), cfg.discount_floor, 1.0);
    row.blend = b;
    row.discount = d;
    row.ops_risk = std::clamp(b * d, 0.0, 1.0);
    return row;
  }
  row.used_fallback = true;
  row.ops_risk = hab_prob;
  return row;
}

OpsRiskRow score_ops_risk(const SampleRecord& r, const NormStats& stats, const OpsRiskConfig& cfg) {
  DriverValues normalized{}, seasonal{};
  for (Driver d : kDrivers) {
    const auto x = r.driver(d);
    const auto& q = stats.of(d);
    if (x && q) normalized[static_cast<int>(d)] = normalize_driver(*x, *q);
    seasonal[static_cast<int>(d)] = seasonal_score(x, r.month, stats, d, cfg);
  }
  const Composite oci = compute_oci(normalized, cfg);
  const Composite season = season_adj(seasonal, cfg);
  OpsRiskRow row = blend_and_discount(r.hab_prob, r.det_mean, oci.adjusted, season.adjusted, cfg);
  row.oci = oci.raw;
  row.coverage = oci.coverage;
  row.season_coverage = season.coverage;
  return row;
}

ThresholdSet base_thresholds(const OpsRiskConfig& cfg) {
  ThresholdSet t;
  t.tau_watch = cfg.base_watch;
  t.tau_action = cfg.base_action;
  t.source = ThresholdSource::BaseFallback;
  return t;
}

std::optional<double> exceedance_quantile(std::span<const double> sorted, double rate) {
  const std::size_t n = sorted.size();
  if (n == 0) return std::nullopt;
  // Counts are integers; the slack only absorbs rounding in rate * n when the
  // rate itself came from a count ratio.
  const double allowed = std::floor(rate * static_cast<double>(n) + 1e-9);
  // #{x >= sorted[i]} = n - (first index of sorted[i]); scan distinct values
  // from the bottom for the first whose exceedance count fits.
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    if (static_cast<double>(n - i) <= allowed) return sorted[i];
  }
  return std::nullopt;
}

std::pair<double, double> clamp_thresholds(std::optional<double> watch_raw, std::optional<double> action_raw,
                                           const OpsRiskConfig& cfg) {
  double tw = std::clamp(watch_raw.value_or(cfg.watch_bounds.hi), cfg.watch_bounds.lo, cfg.watch_bounds.hi);
  double ta = std::clamp(action_raw.value_or(cfg.action_bounds.hi), cfg.action_bounds.lo, cfg.action_bounds.hi);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (ta - tw < cfg.min_gap) {
    ta = std::min(tw + cfg.min_gap, cfg.action_bounds.hi);
    // tw + gap can round so that the difference lands one ulp short.
    while (ta - tw < cfg.min_gap && ta < cfg.action_bounds.hi) ta = std::nextafter(ta, inf);
  }
  if (ta - tw < cfg.min_gap) {
    tw = ta - cfg.min_gap;
    while (ta - tw < cfg.min_gap) tw = std::nextafter(tw, -inf);
  }
  return {tw, ta};
}

namespace {

ThresholdSet match_rates(double r_watch, double r_action, std::span<const double> ops_risk_pool,
                         const OpsRiskConfig& cfg) {
  auto sorted = stats::sorted_copy(ops_risk_pool);
  ThresholdSet t;
  t.source = ThresholdSource::Calibrated;
  t.r_watch = r_watch;
  t.r_action = r_action;
  t.tau_watch_raw = exceedance_quantile(sorted, r_watch);
  t.tau_action_raw = exceedance_quantile(sorted, r_action);
  std::tie(t.tau_watch, t.tau_action) = clamp_thresholds(t.tau_watch_raw, t.tau_action_raw, cfg);
  return t;
}

}  // namespace

ThresholdSet calibrate_thresholds(std::span<const double> hab_prob_pool, std::span<const double> ops_risk_pool,
                                  const OpsRiskConfig& cfg) {
  if (hab_prob_pool.empty() || ops_risk_pool.empty()) return base_thresholds(cfg);
  std::size_t n_watch = 0, n_action = 0;
  for (double p : hab_prob_pool) {
    n_watch += p >= cfg.base_watch ? 1 : 0;
    n_action += p >= cfg.base_action ? 1 : 0;
  }
  const auto n = static_cast<double>(hab_prob_pool.size());
  return match_rates(static_cast<double>(n_watch) / n, static_cast<double>(n_action) / n, ops_risk_pool, cfg);
}

ThresholdSet thresholds_for_rates(double r_watch, double r_action, std::span<const double> ops_risk_pool,
                                  const OpsRiskConfig& cfg) {
  if (!(r_watch >= 0.0 && r_watch <= 1.0 && r_action >= 0.0 && r_action <= 1.0)) {
    throw std::invalid_argument("target rates must lie in [0,1]");
  }
  if (ops_risk_pool.empty()) return base_thresholds(cfg);
  return match_rates(r_watch, r_action, ops_risk_pool, cfg);
}

ThresholdSet explicit_thresholds(double tau_watch, double tau_action, const OpsRiskConfig& cfg) {
  // Operator input like (0.55, 0.59) differs by 0.04 only up to rounding.
  constexpr double slack = 1e-9;
  if (!(tau_watch >= cfg.watch_bounds.lo && tau_watch <= cfg.watch_bounds.hi)) {
    throw std::invalid_argument("tau_watch outside its bounds");
  }
  if (!(tau_action >= cfg.action_bounds.lo && tau_action <= cfg.action_bounds.hi)) {
    throw std::invalid_argument("tau_action outside its bounds");
  }
  if (tau_action - tau_watch < cfg.min_gap - slack) {
    throw std::invalid_argument("tau_action - tau_watch is below the minimum gap");
  }
  ThresholdSet t;
  t.tau_watch = tau_watch;
  t.tau_action = tau_action;
  t.source = ThresholdSource::Calibrated;
  return t;
}

AlertState alert_state(double p, const ThresholdSet& t) {
  if (p >= t.tau_action) return AlertState::ACTION;
  if (p >= t.tau_watch) return AlertState::WATCH;
  return AlertState::NORMAL;
}

nlohmann::ordered_json to_json(const ThresholdSet& t) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["tau_watch"] = t.tau_watch;
  j["tau_action"] = t.tau_action;
  j["r_watch"] = opt(t.r_watch);
  j["r_action"] = opt(t.r_action);
  j["source"] = t.source == ThresholdSource::Calibrated ? "calibrated" : "base_fallback";
  j["tau_watch_raw"] = opt(t.tau_watch_raw);
  j["tau_action_raw"] = opt(t.tau_action_raw);
  return j;
}

ThresholdSet threshold_set_from_json(const nlohmann::ordered_json& j) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  ThresholdSet t;
  t.tau_watch = j.at("tau_watch").get<double>();
  t.tau_action = j.at("tau_action").get<double>();
  t.r_watch = opt("r_watch");
  t.r_action = opt("r_action");
  const auto src = j.value("source", std::string("calibrated"));
  if (src == "calibrated") t.source = ThresholdSource::Calibrated;
  else if (src == "base_fallback") t.source = ThresholdSource::BaseFallback;
  else throw std::invalid_argument("unknown threshold source: " + src);
  t.tau_watch_raw = opt("tau_watch_raw");
  t.tau_action_raw = opt("tau_action_raw");
  return t;
}

std::vector<ScoredRow> score_table(std::span<const SampleRecord> records, const NormStats& stats,
                                   const OpsRiskConfig& cfg, const ThresholdSet* thresholds) {
  std::vector<ScoredRow> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    ScoredRow row{r, score_ops_risk(r, stats, cfg), std::nullopt};
    if (thresholds && row.risk.ops_risk) row.state = alert_state(*row.risk.ops_risk, *thresholds);
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, 9> kOpsColumns{"oci",      "coverage", "oci_adj",       "season_adj", "blend",
                                                      "discount", "ops_risk", "used_fallback", "state"};

}  // namespace

void write_ops_table(std::ostream& out, std::span<const ScoredRow> rows) {
  std::vector<std::string> cells(kTableColumns.begin(), kTableColumns.end());
  cells.insert(cells.end(), kOpsColumns.begin(), kOpsColumns.end());
  csv::write_row(out, cells);
  auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; };
  for (const auto& row : rows) {
    auto raw = serialize_record(row.record);
    std::size_t c = 0;
    for (; c < kTableColumns.size(); ++c) cells[c] = raw.find(kTableColumns[c])->second;
    cells[c++] = num(row.risk.oci);
    cells[c++] = format_number(row.risk.coverage);
    cells[c++] = format_number(row.risk.oci_adj);
    cells[c++] = format_number(row.risk.season_adj);
    cells[c++] = num(row.risk.blend);
    cells[c++] = num(row.risk.discount);
    cells[c++] = num(row.risk.ops_risk);
    cells[c++] = row.risk.used_fallback ? "1" : "0";
    cells[c++] = row.state ? std::string(to_string(*row.state)) : std::string{};
    csv::write_row(out, cells);
  }
}

void write_ops_table(const std::string& path, std::span<const ScoredRow> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_ops_table(out, rows);
}

std::vector<ScoredRow> read_ops_table(std::istream& in) {
  auto t = csv::read(in);
  for (std::string_view col : kTableColumns) {
    if (t.column(col) < 0) throw std::runtime_error("ops table lacks column " + std::string(col));
  }
  for (std::string_view col : kOpsColumns) {
    if (t.column(col) < 0) throw std::runtime_error("ops table lacks column " + std::string(col));
  }
  auto num = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  std::vector<ScoredRow> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& cells = t.rows[i];
    RawRecord raw;
    for (std::string_view col : kTableColumns) raw[std::string(col)] = cells[static_cast<std::size_t>(t.column(col))];
    auto get = [&](std::string_view col) -> const std::string& { return cells[static_cast<std::size_t>(t.column(col))]; };
    ScoredRow row;
    try {
      row.record = validate_record(raw);
      row.risk.oci = num(get("oci"));
      row.risk.coverage = num(get("coverage")).value_or(0.0);
      row.risk.oci_adj = num(get("oci_adj")).value_or(0.5);
      row.risk.season_adj = num(get("season_adj")).value_or(0.5);
      row.risk.blend = num(get("blend"));
      row.risk.discount = num(get("discount"));
      row.risk.ops_risk = num(get("ops_risk"));
      row.risk.used_fallback = get("used_fallback") == "1";
      if (!get("state").empty()) row.state = parse_alert_state(get("state"));
    } catch (const std::exception& e) {
      throw std::runtime_error("ops table row " + std::to_string(i + 1) + ": " + e.what());
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ScoredRow> read_ops_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_ops_table(in);
}

}  // namespace rednet
