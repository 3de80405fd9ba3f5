#pragma once

// Reference-pool statistics of the four ocean-colour/thermal drivers:
// per-driver Q10/Q90 for quantile normalization and per-(driver, month)
// median/IQR for seasonal anomaly z-scores. Both label mining and the
// operational index consume these; both must fit them on reference rows only.
//
// Quantiles use the higher-order-statistic convention.

#include <array>
#include <optional>
#include <span>

#include "json.hpp"
#include "rednet/record.hpp"

namespace rednet {

struct MonthlyCell {
  double median = 0.0;
  double iqr = 0.0;
  std::size_t n = 0;
};

struct MonthlyStats {
  // cells[driver][month - 1]; empty when no reference values exist.
  std::array<std::array<std::optional<MonthlyCell>, 12>, 4> cells{};

  const std::optional<MonthlyCell>& cell(Driver d, int month) const;
  bool operator==(const MonthlyStats&) const = default;
};

struct QuantileRange {
  double q10 = 0.0;
  double q90 = 0.0;
  bool operator==(const QuantileRange&) const = default;
};

struct NormStats {
  std::array<std::optional<QuantileRange>, 4> range{};
  MonthlyStats monthly;

  const std::optional<QuantileRange>& of(Driver d) const { return range[static_cast<int>(d)]; }
  bool operator==(const NormStats&) const = default;
};

MonthlyStats fit_monthly_stats(std::span<const SampleRecord> records);
NormStats fit_norm_stats(std::span<const SampleRecord> records);

// Unclipped robust anomaly (x - median) / IQR; 0 when IQR == 0.
double anomaly_z(double x, const MonthlyCell& cell);

nlohmann::ordered_json to_json(const MonthlyStats& s);
nlohmann::ordered_json to_json(const NormStats& s);
MonthlyStats monthly_stats_from_json(const nlohmann::ordered_json& j);
NormStats norm_stats_from_json(const nlohmann::ordered_json& j);

}  // namespace rednet
