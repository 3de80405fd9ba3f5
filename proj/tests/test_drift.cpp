#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rednet/drift.hpp"
#include "rednet/synthetic.hpp"
#include "support.hpp"

using namespace rednet;
using namespace rednet::drift;

namespace {

using testing::scored_row;

// Brute-force KS: evaluate both ECDFs at every sample point.
double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0.0;
  auto ecdf = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double u) { return u <= x; })) /
           static_cast<double>(v.size());
  };
  for (const auto* v : {&a, &b}) {
    for (double x : *v) best = std::max(best, std::abs(ecdf(a, x) - ecdf(b, x)));
  }
  return best;
}

}  // namespace

TEST_CASE("psi examples") {
  Rng rng(51);
  std::vector<double> a;
  for (int i = 0; i < 500; ++i) a.push_back(rng.normal());
  CHECK(psi(a, a) == 0.0);

  const std::vector<double> p_ref{0.5, 0.5}, p_cur{0.9, 0.1};
  CHECK(psi_from_proportions(p_ref, p_cur) == doctest::Approx(0.4 * std::log(1.8) - 0.4 * std::log(0.2)).epsilon(1e-12));
  CHECK(std::abs(psi_from_proportions(p_ref, p_cur) - 0.8789) <= 1e-4);

  std::vector<double> far;
  for (double v : a) far.push_back(v + 100.0);
  CHECK(psi(a, far) > 5.0);

  CHECK_THROWS_AS(psi({}, a), std::invalid_argument);
  CHECK_THROWS_AS(psi(a, {}), std::invalid_argument);
}

TEST_CASE("psi uses reference deciles") {
  std::vector<double> ref;
  for (int i = 0; i < 100; ++i) ref.push_back(i);
  const auto edges = reference_edges(ref, 10);
  REQUIRE(edges.size() == 9);
  CHECK(edges[0] == doctest::Approx(9.9));
  CHECK(edges[8] == doctest::Approx(89.1));
  // current entirely in the top decile
  std::vector<double> cur(50, 95.0);
  const double expected = (1.0 - 0.1) * std::log(1.0 / 0.1) + 9 * (1e-4 - 0.1) * std::log(1e-4 / 0.1);
  CHECK(psi(ref, cur) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ks examples") {
  const std::vector<double> a{0.3, 0.1, 0.7};
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(std::vector<double>{0, 1}, std::vector<double>{0.5, 1.5}) == 0.5);
  CHECK(ks_distance(std::vector<double>{0, 1, 2}, std::vector<double>{3, 4}) == 1.0);
  CHECK_THROWS_AS(ks_distance({}, a), std::invalid_argument);
}

TEST_CASE("ks agrees with the brute-force ECDF oracle and is transform invariant") {
  Rng rng(52);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a, b;
    const int na = 1 + static_cast<int>(rng.below(30)), nb = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < na; ++i) a.push_back(std::round(rng.normal() * 4) / 4);
    for (int i = 0; i < nb; ++i) b.push_back(std::round((rng.normal() + 0.5) * 4) / 4);
    const double ks = ks_distance(a, b);
    CHECK(ks == ks_oracle(a, b));
    CHECK(ks >= 0.0);
    CHECK(ks <= 1.0);
    std::vector<double> ta, tb;
    for (double v : a) ta.push_back(std::exp(v) * 2 + 1);
    for (double v : b) tb.push_back(std::exp(v) * 2 + 1);
    CHECK(ks_distance(ta, tb) == ks);
  }
}

TEST_CASE("monthly_alert_rates examples") {
  ThresholdSet t;
  t.tau_watch = 0.55;
  t.tau_action = 0.65;
  std::vector<ScoredRow> rows;
  for (int d = 1; d <= 10; ++d) {
    char date[16];
    std::snprintf(date, sizeof date, "2025-03-%02d", d);
    rows.push_back(scored_row("A", date, d <= 3 ? 0.7 : (d == 4 ? 0.55 : 0.1)));
  }
  rows.push_back(scored_row("A", "2025-04-01", 0.0));
  auto unscorable = scored_row("A", "2025-05-01", 0.0);
  unscorable.risk.ops_risk = std::nullopt;
  rows.push_back(unscorable);

  const auto rates = monthly_alert_rates(rows, t);
  REQUIRE(rates.size() == 2);
  CHECK(rates[0].month == "2025-03");
  CHECK(rates[0].n == 10);
  CHECK(rates[0].rate_action == doctest::Approx(0.3));
  CHECK(rates[0].rate_watch == doctest::Approx(0.4));
  CHECK(rates[1].rate_watch == 0.0);
  CHECK(rates[1].rate_action == 0.0);
}

TEST_CASE("topk_events examples") {
  std::vector<ScoredRow> rows{scored_row("A", "2025-01-01", 0.2), scored_row("A", "2025-01-05", 0.9),
                              scored_row("A", "2025-02-01", 0.9), scored_row("B", "2025-01-01", 0.4)};
  auto top = topk_events(rows, 10);
  REQUIRE(top.at("A").size() == 3);
  CHECK(format_date(top.at("A")[0].record.timestamp) == "2025-02-01");
  CHECK(format_date(top.at("A")[1].record.timestamp) == "2025-01-05");
  CHECK(*top.at("A")[2].risk.ops_risk == 0.2);
  CHECK(top.at("B").size() == 1);
  top = topk_events(rows, 1);
  CHECK(top.at("A").size() == 1);
  CHECK_THROWS_AS(topk_events(rows, 0), std::invalid_argument);
}

TEST_CASE("pooling offsetting shifts lowers PSI") {
  Rng rng(53);
  std::vector<ScoredRow> ref, cur;
  const std::vector<std::pair<std::string, double>> plants{{"A", 0.15}, {"B", -0.15}};
  for (const auto& [plant, shift] : plants) {
    for (int i = 0; i < 2000; ++i) ref.push_back(scored_row(plant, "2020-01-01", std::clamp(0.5 + 0.1 * rng.normal(), 0.0, 1.0)));
    for (int i = 0; i < 500; ++i) {
      cur.push_back(scored_row(plant, "2025-01-01", std::clamp(0.5 + shift + 0.1 * rng.normal(), 0.0, 1.0)));
    }
  }
  const auto rep = drift_report(ref, cur, base_thresholds());
  REQUIRE(rep.per_plant.size() == 2);
  REQUIRE(rep.pooled);
  double max_psi = 0.0;
  for (const auto& p : rep.per_plant) max_psi = std::max(max_psi, p.psi);
  CHECK(rep.pooled->psi < max_psi);
  const auto j = to_json(rep);
  CHECK(j.at("metadata").at("psi_binning") == "reference_deciles");
}

TEST_CASE("drift fixture lands in the monitored regime") {
  const auto f = testing::drift_fixture();
  const auto rep = drift_report(f.reference, f.current, base_thresholds());
  REQUIRE(rep.per_plant.size() == 4);
  double max_psi = 0.0;
  for (const auto& p : rep.per_plant) {
    CHECK(p.psi >= 1.0);
    CHECK(p.psi <= 6.0);
    CHECK(p.ks >= 0.4);
    CHECK(p.ks <= 0.7);
    max_psi = std::max(max_psi, p.psi);
  }
  REQUIRE(rep.pooled);
  CHECK(rep.pooled->psi < max_psi);
}
