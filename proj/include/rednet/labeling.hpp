#pragma once

// Label mining: heuristic candidates from chlorophyll anomalies, filtered by
// driver availability, merged with trusted labels by logical OR.

#include <span>
#include <vector>

#include "rednet/driver_stats.hpp"
#include "rednet/record.hpp"

namespace rednet {

struct MiningConfig {
  double z_hi = 2.0;     // chlor_a monthly anomaly threshold
  int min_quality = 2;   // minimum present drivers out of 4

  // Throws std::invalid_argument unless z_hi > 0 and 1 <= min_quality <= 4.
  void check() const;
};

// 1 iff chlor_a is present, its month has reference stats, and the unclipped
// monthly anomaly z is at least z_hi.
int heuristic_score(const SampleRecord& r, const MonthlyStats& stats, const MiningConfig& cfg = {});

bool quality(const SampleRecord& r, const MiningConfig& cfg = {});

LabelSet mine_label(const SampleRecord& r, const MonthlyStats& stats, const MiningConfig& cfg = {});

// Fills y_weak and y_final using the given (reference-fitted) stats.
// y_trusted is never modified; missing trusted counts as 0 in the OR.
std::vector<SampleRecord> mine_labels(std::vector<SampleRecord> records, const MonthlyStats& stats,
                                      const MiningConfig& cfg = {});

// Fits the monthly stats on `records` themselves, then mines. Use the
// two-argument form inside cross-validation.
std::vector<SampleRecord> mine_labels(std::vector<SampleRecord> records, const MiningConfig& cfg = {});

}  // namespace rednet
