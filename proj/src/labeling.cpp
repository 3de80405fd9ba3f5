#include "rednet/labeling.hpp"

#include <stdexcept>

namespace rednet {

void MiningConfig::check() const {
  if (!(z_hi > 0.0)) throw std::invalid_argument("z_hi must be positive");
  if (min_quality < 1 || min_quality > 4) throw std::invalid_argument("min_quality must be in 1..4");
}

int heuristic_score(const SampleRecord& r, const MonthlyStats& stats, const MiningConfig& cfg) {
  if (!r.chlor_a) return 0;
  const auto& cell = stats.cell(Driver::ChlorA, r.month);
  if (!cell) return 0;
  return anomaly_z(*r.chlor_a, *cell) >= cfg.z_hi ? 1 : 0;
}

bool quality(const SampleRecord& r, const MiningConfig& cfg) {
  int present = 0;
  for (Driver d : kDrivers) present += r.driver(d).has_value() ? 1 : 0;
  return present >= cfg.min_quality;
}

LabelSet mine_label(const SampleRecord& r, const MonthlyStats& stats, const MiningConfig& cfg) {
  LabelSet l;
  l.y_trusted = r.y_trusted;
  l.h_score = heuristic_score(r, stats, cfg);
  l.quality_pass = quality(r, cfg);
  l.y_weak = (l.h_score == 1.0 && l.quality_pass) ? 1 : 0;
  l.y_final = (r.y_trusted.value_or(0) == 1 || *l.y_weak == 1) ? 1 : 0;
  return l;
}

std::vector<SampleRecord> mine_labels(std::vector<SampleRecord> records, const MonthlyStats& stats,
                                      const MiningConfig& cfg) {
  cfg.check();
  for (auto& r : records) {
    auto l = mine_label(r, stats, cfg);
    r.y_weak = l.y_weak;
    r.y_final = l.y_final;
  }
  return records;
}

std::vector<SampleRecord> mine_labels(std::vector<SampleRecord> records, const MiningConfig& cfg) {
  auto stats = fit_monthly_stats(records);
  return mine_labels(std::move(records), stats, cfg);
}

}  // namespace rednet
