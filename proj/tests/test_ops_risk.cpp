#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rednet/ops_risk.hpp"
#include "rednet/synthetic.hpp"
#include "support.hpp"

using namespace rednet;

namespace {

constexpr int kChl = static_cast<int>(Driver::ChlorA);
constexpr int kNflh = static_cast<int>(Driver::Nflh);
constexpr int kKd = static_cast<int>(Driver::Kd490);
constexpr int kSst = static_cast<int>(Driver::Sst);

NormStats stats_with_cell(Driver d, int month, double median, double iqr) {
  NormStats s;
  s.monthly.cells[static_cast<int>(d)][static_cast<std::size_t>(month - 1)] = MonthlyCell{median, iqr, 10};
  return s;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t count_ge(const std::vector<double>& pool, double tau) {
  return static_cast<std::size_t>(std::count_if(pool.begin(), pool.end(), [&](double v) { return v >= tau; }));
}

}  // namespace

TEST_CASE("config defaults and invariants") {
  OpsRiskConfig c;
  CHECK_NOTHROW(c.check());
  CHECK(c.weight(Driver::ChlorA) == 0.35);
  CHECK(c.weight(Driver::Nflh) == 0.35);
  CHECK(c.weight(Driver::Kd490) == 0.20);
  CHECK(c.weight(Driver::Sst) == 0.10);
  CHECK(c.base_watch == 0.55);
  CHECK(c.base_action == 0.6238688594);
  CHECK(ops_risk_config_from_json(to_json(c)).driver_weights == c.driver_weights);
  c.driver_weights[0] = 0.5;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = {};
  c.blend.hab_prob = 0.5;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = {};
  c.discount_floor = 1.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
}

TEST_CASE("normalize_driver examples") {
  const QuantileRange q{0.1, 0.6};
  CHECK(normalize_driver(0.1, q) == 0.0);
  CHECK(normalize_driver(0.6, q) == 1.0);
  CHECK(normalize_driver(0.35, q) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normalize_driver(-4.0, q) == 0.0);
  CHECK(normalize_driver(7.0, q) == 1.0);
  CHECK(normalize_driver(3.0, {0.2, 0.2}) == 0.5);
}

TEST_CASE("compute_oci examples") {
  auto c = compute_oci({1.0, 1.0, 1.0, 1.0});
  CHECK(*c.raw == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.coverage == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.adjusted == doctest::Approx(1.0).epsilon(1e-15));

  DriverValues only_chl{};
  only_chl[kChl] = 0.8;
  c = compute_oci(only_chl);
  CHECK(*c.raw == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(c.coverage == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(c.adjusted == doctest::Approx(0.605).epsilon(1e-15));

  c = compute_oci({});
  CHECK_FALSE(c.raw);
  CHECK(c.coverage == 0.0);
  CHECK(c.adjusted == 0.5);
}

TEST_CASE("seasonal_score examples") {
  const auto stats = stats_with_cell(Driver::ChlorA, 6, 0.3, 0.1);
  CHECK(*seasonal_score(0.3, 6, stats, Driver::ChlorA) == 0.5);
  CHECK(*seasonal_score(5.0, 6, stats, Driver::ChlorA) == doctest::Approx(0.9692).epsilon(1e-4));
  CHECK(*seasonal_score(5.0, 6, stats, Driver::ChlorA) == doctest::Approx(sigmoid(3.45)).epsilon(1e-15));
  CHECK(*seasonal_score(-5.0, 6, stats, Driver::ChlorA) == doctest::Approx(sigmoid(-3.45)).epsilon(1e-15));
  CHECK_FALSE(seasonal_score(std::nullopt, 6, stats, Driver::ChlorA));
  CHECK_FALSE(seasonal_score(0.3, 7, stats, Driver::ChlorA));

  const auto sst = stats_with_cell(Driver::Sst, 6, 28.0, 1.5);
  CHECK(*seasonal_score(26.0, 6, sst, Driver::Sst) == 0.5);
  CHECK(*seasonal_score(29.5, 6, sst, Driver::Sst) == doctest::Approx(sigmoid(1.15)).epsilon(1e-15));

  const auto flat = stats_with_cell(Driver::Nflh, 6, 0.1, 0.0);
  CHECK(*seasonal_score(0.9, 6, flat, Driver::Nflh) == 0.5);
}

TEST_CASE("season_adj examples") {
  CHECK(season_adj({0.5, 0.5, 0.5, 0.5}).adjusted == 0.5);
  DriverValues only_nflh{};
  only_nflh[kNflh] = 1.0;
  CHECK(season_adj(only_nflh).adjusted == doctest::Approx(0.675).epsilon(1e-15));
  CHECK(season_adj({}).adjusted == 0.5);
}

TEST_CASE("blend_and_discount examples") {
  auto row = blend_and_discount(0.6, 0.6, 0.6, 0.6);
  CHECK(*row.blend == 0.6);
  CHECK(*row.discount == 1.0);
  CHECK(*row.ops_risk == 0.6);
  CHECK_FALSE(row.used_fallback);

  row = blend_and_discount(1.0, 0.0, 0.5, 0.5);
  CHECK(*row.blend == doctest::Approx(0.575).epsilon(1e-15));
  CHECK(*row.discount == doctest::Approx(0.82).epsilon(1e-15));
  CHECK(std::abs(*row.ops_risk - 0.4715) <= 1e-9);

  row = blend_and_discount(0.7, std::nullopt, 0.5, 0.5);
  CHECK(row.used_fallback);
  CHECK(*row.ops_risk == 0.7);
  CHECK_FALSE(row.blend);

  row = blend_and_discount(std::nullopt, 0.4, 0.5, 0.5);
  CHECK(row.used_fallback);
  CHECK_FALSE(row.scorable());
}

TEST_CASE("ops-risk ranges and monotonicity over random inputs") {
  Rng rng(21);
  for (int i = 0; i < 20000; ++i) {
    const double h = rng.uniform(), d = rng.uniform(), o = rng.uniform(), s = rng.uniform();
    const auto row = blend_and_discount(h, d, o, s);
    CHECK(*row.discount >= 0.75);
    CHECK(*row.discount <= 1.0);
    CHECK(*row.ops_risk >= 0.0);
    CHECK(*row.ops_risk <= 1.0);
    // det_mean tied to hab_prob: strictly increasing in hab_prob
    const double h2 = std::min(1.0, h + 1e-3 + rng.uniform() * 0.1);
    if (h2 > h) CHECK(*blend_and_discount(h2, h2, o, s).ops_risk > *blend_and_discount(h, h, o, s).ops_risk);
  }
  for (int i = 0; i < 5000; ++i) {
    DriverValues v{};
    for (auto& x : v) {
      if (rng.bernoulli(0.7)) x = rng.uniform();
    }
    const double a = compute_oci(v).adjusted;
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    const int j = static_cast<int>(rng.below(4));
    if (v[static_cast<std::size_t>(j)]) {
      auto up = v;
      up[static_cast<std::size_t>(j)] = std::min(1.0, *v[static_cast<std::size_t>(j)] + rng.uniform() * 0.3);
      CHECK(compute_oci(up).adjusted >= a - 1e-15);
    }
  }
}

TEST_CASE("score_ops_risk uses frozen stats end to end") {
  NormStats stats;
  stats.range[kChl] = QuantileRange{0.1, 0.6};
  stats.range[kNflh] = QuantileRange{0.0, 0.4};
  stats.range[kKd] = QuantileRange{0.02, 0.12};
  stats.range[kSst] = QuantileRange{25.0, 31.0};
  auto r = testing::make_record("A", "2024-06-01", "g");
  r.chlor_a = 0.35;
  r.hab_prob = 0.7;
  r.det_mean = 0.7;
  const auto row = score_ops_risk(r, stats);
  CHECK(*row.oci == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(row.coverage == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(row.oci_adj == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(row.season_adj == 0.5);  // no monthly cells
  const double b = 0.4 * 0.7 + 0.25 * 0.7 + 0.2 * 0.5 + 0.15 * 0.5;
  CHECK(*row.ops_risk == doctest::Approx(b).epsilon(1e-15));
}

TEST_CASE("exceedance_quantile") {
  const std::vector<double> v{0.1, 0.2, 0.2, 0.3, 0.4};
  CHECK(*exceedance_quantile(v, 0.4) == 0.3);
  CHECK(*exceedance_quantile(v, 0.5) == 0.3);
  CHECK(*exceedance_quantile(v, 0.6) == 0.3);  // 0.2 would give 4 of 5
  CHECK(*exceedance_quantile(v, 0.8) == 0.2);
  CHECK(*exceedance_quantile(v, 1.0) == 0.1);
  CHECK_FALSE(exceedance_quantile(v, 0.1));
  CHECK_FALSE(exceedance_quantile({}, 0.5));
}

TEST_CASE("calibrate_thresholds examples") {
  const auto empty = calibrate_thresholds({}, {});
  CHECK(empty.tau_watch == 0.55);
  CHECK(empty.tau_action == 0.6238688594);
  CHECK(empty.source == ThresholdSource::BaseFallback);
  CHECK_FALSE(empty.r_watch);

  // identical pools: exceedance rate at tau_watch equals r_watch exactly
  Rng rng(31);
  std::vector<double> pool;
  for (int i = 0; i < 200; ++i) pool.push_back(rng.uniform());
  const auto t = calibrate_thresholds(pool, pool);
  CHECK(t.source == ThresholdSource::Calibrated);
  CHECK(static_cast<double>(count_ge(pool, *t.tau_watch_raw)) / 200.0 == *t.r_watch);
  CHECK(static_cast<double>(count_ge(pool, *t.tau_action_raw)) / 200.0 == *t.r_action);
  CHECK(t.tau_action - t.tau_watch >= 0.04);
}

TEST_CASE("clamp_thresholds gap and bounds") {
  auto [w, a] = clamp_thresholds(0.50, 0.51);
  CHECK(w == 0.50);
  CHECK(a - w >= 0.04);
  CHECK(a == doctest::Approx(0.54).epsilon(1e-12));

  std::tie(w, a) = clamp_thresholds(0.97, 0.975);
  CHECK(w <= 0.95);
  CHECK(a <= 0.99);
  CHECK(a - w >= 0.04);

  std::tie(w, a) = clamp_thresholds(0.01, 0.02);
  CHECK(w == 0.05);
  CHECK(a - w >= 0.04);

  std::tie(w, a) = clamp_thresholds(std::nullopt, std::nullopt);
  CHECK(w == 0.95);
  CHECK(a == 0.99);
}

TEST_CASE("thresholds_for_rates and explicit thresholds") {
  std::vector<double> pool;
  for (int i = 1; i <= 100; ++i) pool.push_back(i / 100.0);
  const auto t = thresholds_for_rates(0.3, 0.1, pool);
  CHECK(*t.tau_watch_raw == 0.71);
  CHECK(*t.tau_action_raw == 0.91);
  CHECK(t.tau_watch == 0.71);
  CHECK(t.tau_action == 0.91);
  CHECK_THROWS_AS(thresholds_for_rates(1.2, 0.1, pool), std::invalid_argument);

  const auto e = explicit_thresholds(0.5, 0.7);
  CHECK(e.tau_watch == 0.5);
  CHECK(e.tau_action == 0.7);
  CHECK_NOTHROW(explicit_thresholds(0.55, 0.59));
  CHECK_THROWS_AS(explicit_thresholds(0.55, 0.58), std::invalid_argument);
  CHECK_THROWS_AS(explicit_thresholds(0.01, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(explicit_thresholds(0.5, 0.995), std::invalid_argument);
}

TEST_CASE("alert_state examples and monotonicity") {
  ThresholdSet t;
  t.tau_watch = 0.55;
  t.tau_action = 0.6239;
  CHECK(alert_state(0.30, t) == AlertState::NORMAL);
  CHECK(alert_state(0.58, t) == AlertState::WATCH);
  CHECK(alert_state(0.55, t) == AlertState::WATCH);
  CHECK(alert_state(0.6239, t) == AlertState::ACTION);
  AlertState prev = AlertState::NORMAL;
  for (int i = 0; i <= 1000; ++i) {
    const auto s = alert_state(i / 1000.0, t);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("threshold JSON round trip") {
  std::vector<double> pool;
  for (int i = 0; i < 50; ++i) pool.push_back(i / 50.0);
  const auto t = calibrate_thresholds(pool, pool);
  const auto j = to_json(t);
  for (const char* key : {"tau_watch", "tau_action", "r_watch", "r_action", "source"}) CHECK(j.contains(key));
  CHECK(threshold_set_from_json(j) == t);
  CHECK(j.at("source") == "calibrated");
  CHECK(to_json(base_thresholds()).at("source") == "base_fallback");
}

TEST_CASE("ops table round trip") {
  SyntheticConfig cfg;
  cfg.end = "2017-04-30";
  auto records = generate_synthetic(cfg);
  for (auto& r : records) r.hab_prob = r.det_mean;
  const auto stats = fit_norm_stats(records);
  const auto t = base_thresholds();
  const auto rows = score_table(records, stats, {}, &t);
  std::stringstream buf;
  write_ops_table(buf, rows);
  const auto back = read_ops_table(buf);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].record == rows[i].record);
    CHECK(back[i].risk.ops_risk == rows[i].risk.ops_risk);
    CHECK(back[i].risk.blend == rows[i].risk.blend);
    CHECK(back[i].risk.used_fallback == rows[i].risk.used_fallback);
    CHECK(back[i].state == rows[i].state);
  }
}
