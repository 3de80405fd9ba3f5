#pragma once

// Operational HAB risk index (ops_risk_v2_seasonal).
//
//   x~_j      = clip((x_j - Q10_j) / (Q90_j - Q10_j), 0, 1)
//   OCI       = sum_j w_j x~_j 1_j / sum_j w_j 1_j
//   c         = sum_j w_j 1_j / sum_j w_j
//   OCI_adj   = OCI c + 0.5 (1 - c)
//   z_j       = clip((x_j - median_m(x_j)) / IQR_m(x_j), -3, 3),  z_sst >= 0
//   s_j       = sigmoid(1.15 z_j), aggregated like OCI into Season_adj
//   b         = 0.40 hab_prob + 0.25 det_mean + 0.20 OCI_adj + 0.15 Season_adj
//   d         = clip(1 - 0.18 |hab_prob - det_mean|, 0.75, 1)
//   ops_risk  = clip(b d, 0, 1), falling back to hab_prob when b is undefined
//
// Thresholds are re-fitted so that ops_risk exceeds them as often as hab_prob
// exceeds the legacy base thresholds on the same calibration pool.

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rednet/driver_stats.hpp"
#include "rednet/record.hpp"

namespace rednet {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct BlendWeights {
  double hab_prob = 0.40;
  double det_mean = 0.25;
  double oci_adj = 0.20;
  double season_adj = 0.15;
};

struct OpsRiskConfig {
  // Indexed by Driver: chlor_a, nflh, kd490, sst.
  std::array<double, 4> driver_weights{0.35, 0.35, 0.20, 0.10};
  BlendWeights blend;
  double discount_slope = 0.18;
  double discount_floor = 0.75;
  double sigmoid_slope = 1.15;
  double z_clip = 3.0;
  double norm_q_lo = 0.1;
  double norm_q_hi = 0.9;
  double base_watch = 0.55;
  double base_action = 0.6238688594;
  double min_gap = 0.04;
  Bounds watch_bounds{0.05, 0.95};
  Bounds action_bounds{0.05, 0.99};

  double weight(Driver d) const { return driver_weights[static_cast<int>(d)]; }
  // Throws std::invalid_argument when an invariant is violated.
  void check() const;
};

nlohmann::ordered_json to_json(const OpsRiskConfig& c);
OpsRiskConfig ops_risk_config_from_json(const nlohmann::ordered_json& j);

// Clipped affine rescale onto [0,1]. A degenerate range (Q90 <= Q10) maps
// every value to 0.5.
double normalize_driver(double x, const QuantileRange& q);

using DriverValues = std::array<std::optional<double>, 4>;

// Availability-weighted composite with coverage shrinkage toward 0.5.
struct Composite {
  std::optional<double> raw;  // absent when no driver is available
  double coverage = 0.0;
  double adjusted = 0.5;
};

Composite compute_oci(const DriverValues& normalized, const OpsRiskConfig& cfg = {});

// Seasonal anomaly score of one driver. Empty when x is missing or the month
// has no reference stats.
std::optional<double> seasonal_score(std::optional<double> x, int month, const NormStats& stats, Driver driver,
                                     const OpsRiskConfig& cfg = {});

// Same aggregation and shrinkage as compute_oci, applied to seasonal scores.
Composite season_adj(const DriverValues& scores, const OpsRiskConfig& cfg = {});

struct OpsRiskRow {
  std::optional<double> oci;
  double coverage = 0.0;
  double oci_adj = 0.5;
  double season_coverage = 0.0;
  double season_adj = 0.5;
  std::optional<double> blend;
  std::optional<double> discount;
  std::optional<double> ops_risk;  // absent only when unscorable
  bool used_fallback = false;

  bool scorable() const { return ops_risk.has_value(); }
};

// b and d are defined only when hab_prob and det_mean are both present
// (OCI_adj and Season_adj always are). Otherwise ops_risk falls back to
// hab_prob; with hab_prob missing too the row is unscorable.
OpsRiskRow blend_and_discount(std::optional<double> hab_prob, std::optional<double> det_mean, double oci_adj,
                              double season_adj, const OpsRiskConfig& cfg = {});

// Full per-row evaluation against frozen reference stats.
OpsRiskRow score_ops_risk(const SampleRecord& r, const NormStats& stats, const OpsRiskConfig& cfg = {});

enum class ThresholdSource { Calibrated, BaseFallback };

struct ThresholdSet {
  double tau_watch = 0.55;
  double tau_action = 0.6238688594;
  // Legacy exceedance rates on the hab_prob pool; absent for base fallback.
  std::optional<double> r_watch;
  std::optional<double> r_action;
  ThresholdSource source = ThresholdSource::BaseFallback;
  // Matched quantiles before bounds/gap clamping. Absent for base fallback or
  // when no pool value satisfies the rate (rate 0).
  std::optional<double> tau_watch_raw;
  std::optional<double> tau_action_raw;

  bool operator==(const ThresholdSet&) const = default;
};

ThresholdSet base_thresholds(const OpsRiskConfig& cfg = {});

// Smallest pool value v with #{pool >= v} <= rate * n, or empty if none.
// `sorted` must be ascending.
std::optional<double> exceedance_quantile(std::span<const double> sorted, double rate);

// Clamps a raw pair to the configured bounds, then enforces the minimum gap by
// raising tau_action (capped at its upper bound) and, if still short, lowering
// tau_watch. Missing raw values clamp to the upper bound.
std::pair<double, double> clamp_thresholds(std::optional<double> watch_raw, std::optional<double> action_raw,
                                           const OpsRiskConfig& cfg = {});

// Exceedance-rate matching. Either pool empty -> base thresholds with
// source BaseFallback.
ThresholdSet calibrate_thresholds(std::span<const double> hab_prob_pool, std::span<const double> ops_risk_pool,
                                  const OpsRiskConfig& cfg = {});

// Same matching with operator-supplied target rates instead of legacy
// exceedance rates.
ThresholdSet thresholds_for_rates(double r_watch, double r_action, std::span<const double> ops_risk_pool,
                                  const OpsRiskConfig& cfg = {});

// Explicit thresholds. Throws std::invalid_argument when the pair violates
// bounds or the minimum gap.
ThresholdSet explicit_thresholds(double tau_watch, double tau_action, const OpsRiskConfig& cfg = {});

AlertState alert_state(double p, const ThresholdSet& t);

nlohmann::ordered_json to_json(const ThresholdSet& t);
ThresholdSet threshold_set_from_json(const nlohmann::ordered_json& j);

// One output row of the operational table.
struct ScoredRow {
  SampleRecord record;
  OpsRiskRow risk;
  std::optional<AlertState> state;
};

std::vector<ScoredRow> score_table(std::span<const SampleRecord> records, const NormStats& stats,
                                   const OpsRiskConfig& cfg = {}, const ThresholdSet* thresholds = nullptr);

// ops.csv: the table columns, then oci, coverage, oci_adj, season_adj, blend,
// discount, ops_risk, used_fallback, state.
void write_ops_table(std::ostream& out, std::span<const ScoredRow> rows);
void write_ops_table(const std::string& path, std::span<const ScoredRow> rows);
std::vector<ScoredRow> read_ops_table(const std::string& path);
std::vector<ScoredRow> read_ops_table(std::istream& in);

}  // namespace rednet
