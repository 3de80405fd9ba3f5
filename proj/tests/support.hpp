#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rednet/ops_risk.hpp"
#include "rednet/record.hpp"
#include "rednet/synthetic.hpp"

namespace testing {

inline rednet::SampleRecord make_record(const std::string& plant, const std::string& date, const std::string& group) {
  rednet::SampleRecord r;
  r.plant_id = plant;
  r.timestamp = rednet::parse_date(date);
  r.month = rednet::month_of(r.timestamp);
  r.group_key = group;
  return r;
}

inline rednet::SampleRecord full_record(const std::string& plant, const std::string& date, const std::string& group,
                                        double chlor_a, double sst = 28.0) {
  auto r = make_record(plant, date, group);
  r.chlor_a = chlor_a;
  r.kd490 = 0.05;
  r.nflh = 0.12;
  r.sst = sst;
  r.fai_mean = 0.02;
  r.ndwi_mean = -0.15;
  r.rednir_mean = 0.9;
  r.det_mean = 0.3;
  return r;
}


inline rednet::ScoredRow scored_row(const std::string& plant, const std::string& date, double ops) {
  rednet::ScoredRow r;
  r.record = make_record(plant, date, plant + date);
  r.risk.ops_risk = ops;
  return r;
}

// Four plants whose current-period ops_risk shifts by +/-1.2 and +/-1.6 latent
// standard deviations, so per-plant shifts offset when pooled.
struct DriftFixture {
  std::vector<rednet::ScoredRow> reference;
  std::vector<rednet::ScoredRow> current;
};

inline DriftFixture drift_fixture(std::uint64_t seed = 61, int n_ref = 4000, int n_cur = 2000) {
  rednet::Rng rng(seed);
  auto squash = [](double z) { return 1.0 / (1.0 + std::exp(-0.8 * z)); };
  const std::vector<std::pair<std::string, double>> plants{{"P1", 1.2}, {"P2", -1.2}, {"P3", 1.6}, {"P4", -1.6}};
  DriftFixture f;
  for (const auto& [plant, shift] : plants) {
    for (int i = 0; i < n_ref; ++i) f.reference.push_back(scored_row(plant, "2023-06-01", squash(rng.normal())));
    for (int i = 0; i < n_cur; ++i) f.current.push_back(scored_row(plant, "2025-06-01", squash(rng.normal() + shift)));
  }
  return f;
}

}  // namespace testing
