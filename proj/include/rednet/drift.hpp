#pragma once

// Distribution-shift monitoring between a reference and a current period.
//
// PSI bins are the deciles of the reference sample (linear-interpolated
// quantiles); a value equal to an edge falls in the upper bin. Proportions are
// floored at eps before the log:
//   PSI = sum_i (p_cur,i - p_ref,i) * ln(p_cur,i / p_ref,i)

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rednet/ops_risk.hpp"

namespace rednet::drift {

// Throws std::invalid_argument for empty inputs or n_bins < 2.
double psi(std::span<const double> reference, std::span<const double> current, int n_bins = 10, double eps = 1e-4);

// PSI of two proportion vectors of equal length.
double psi_from_proportions(std::span<const double> p_ref, std::span<const double> p_cur, double eps = 1e-4);

// Interior bin edges (n_bins - 1 reference quantiles).
std::vector<double> reference_edges(std::span<const double> reference, int n_bins = 10);

// Two-sample KS statistic: max |ECDF_ref(x) - ECDF_cur(x)| over all sample
// points. Throws std::invalid_argument for empty inputs.
double ks_distance(std::span<const double> reference, std::span<const double> current);

struct MonthlyRate {
  std::string plant_id;
  std::string month;  // YYYY-MM
  std::size_t n = 0;  // scorable rows
  double rate_watch = 0.0;   // state >= WATCH
  double rate_action = 0.0;  // state == ACTION
};

// Per (plant, calendar month) rates under `thresholds`, sorted by plant then
// month. Unscorable rows are ignored; months without scorable rows are
// omitted.
std::vector<MonthlyRate> monthly_alert_rates(std::span<const ScoredRow> rows, const ThresholdSet& thresholds);

// Per plant, the k scorable rows with the highest ops_risk; ties go to the
// later timestamp. Throws std::invalid_argument when k < 1.
std::map<std::string, std::vector<ScoredRow>> topk_events(std::span<const ScoredRow> rows, int k = 10);

struct PlantDrift {
  std::string plant_id;
  double psi = 0.0;
  double ks = 0.0;
  std::size_t n_ref = 0;
  std::size_t n_cur = 0;
};

struct DriftOptions {
  int n_bins = 10;
  double eps = 1e-4;
  int k = 10;
};

struct DriftReport {
  std::vector<PlantDrift> per_plant;
  std::optional<PlantDrift> pooled;
  std::vector<MonthlyRate> monthly_alert_rates;  // over the current rows
  std::map<std::string, std::vector<ScoredRow>> topk;  // over the current rows
  ThresholdSet thresholds;
  DriftOptions options;
};

// PSI/KS on ops_risk of scorable rows, per plant (plants present in both
// periods) and pooled.
DriftReport drift_report(std::span<const ScoredRow> reference, std::span<const ScoredRow> current,
                         const ThresholdSet& thresholds, const DriftOptions& opt = {});

nlohmann::ordered_json to_json(const MonthlyRate& r);
nlohmann::ordered_json to_json(std::span<const MonthlyRate> rates);
nlohmann::ordered_json event_json(const ScoredRow& row);
nlohmann::ordered_json to_json(const DriftReport& r);

}  // namespace rednet::drift
