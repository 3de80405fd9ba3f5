#include "rednet/drift.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rednet/stats.hpp"

namespace rednet::drift {

std::vector<double> reference_edges(std::span<const double> reference, int n_bins) {
  if (reference.empty()) throw std::invalid_argument("PSI reference sample is empty");
  if (n_bins < 2) throw std::invalid_argument("PSI needs at least 2 bins");
  auto sorted = stats::sorted_copy(reference);
  std::vector<double> edges;
  for (int k = 1; k < n_bins; ++k) edges.push_back(stats::quantile_linear(sorted, static_cast<double>(k) / n_bins));
  return edges;
}

namespace {

std::vector<double> proportions(std::span<const double> values, const std::vector<double>& edges) {
  std::vector<double> p(edges.size() + 1, 0.0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
    p[b] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(values.size());
  return p;
}

}  // namespace

double psi_from_proportions(std::span<const double> p_ref, std::span<const double> p_cur, double eps) {
  if (p_ref.size() != p_cur.size()) throw std::invalid_argument("proportion vectors differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < p_ref.size(); ++i) {
    const double r = std::max(p_ref[i], eps);
    const double c = std::max(p_cur[i], eps);
    total += (c - r) * std::log(c / r);
  }
  return total;
}

double psi(std::span<const double> reference, std::span<const double> current, int n_bins, double eps) {
  if (current.empty()) throw std::invalid_argument("PSI current sample is empty");
  const auto edges = reference_edges(reference, n_bins);
  const auto p_ref = proportions(reference, edges);
  const auto p_cur = proportions(current, edges);
  return psi_from_proportions(p_ref, p_cur, eps);
}

double ks_distance(std::span<const double> reference, std::span<const double> current) {
  if (reference.empty() || current.empty()) throw std::invalid_argument("KS needs two non-empty samples");
  const auto a = stats::sorted_copy(reference);
  const auto b = stats::sorted_copy(current);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
    else x = b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

std::vector<MonthlyRate> monthly_alert_rates(std::span<const ScoredRow> rows, const ThresholdSet& thresholds) {
  struct Counts {
    std::size_t n = 0, watch = 0, action = 0;
  };
  std::map<std::pair<std::string, std::string>, Counts> cells;
  for (const auto& row : rows) {
    if (!row.risk.ops_risk) continue;
    const auto state = alert_state(*row.risk.ops_risk, thresholds);
    auto& c = cells[{row.record.plant_id, format_date(row.record.timestamp).substr(0, 7)}];
    ++c.n;
    c.watch += state >= AlertState::WATCH ? 1 : 0;
    c.action += state == AlertState::ACTION ? 1 : 0;
  }
  std::vector<MonthlyRate> out;
  for (const auto& [key, c] : cells) {
    const auto n = static_cast<double>(c.n);
    out.push_back({key.first, key.second, c.n, static_cast<double>(c.watch) / n, static_cast<double>(c.action) / n});
  }
  return out;
}

std::map<std::string, std::vector<ScoredRow>> topk_events(std::span<const ScoredRow> rows, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::map<std::string, std::vector<ScoredRow>> by_plant;
  for (const auto& row : rows) {
    if (row.risk.ops_risk) by_plant[row.record.plant_id].push_back(row);
  }
  for (auto& [plant, list] : by_plant) {
    std::stable_sort(list.begin(), list.end(), [](const ScoredRow& a, const ScoredRow& b) {
      if (*a.risk.ops_risk != *b.risk.ops_risk) return *a.risk.ops_risk > *b.risk.ops_risk;
      return a.record.timestamp > b.record.timestamp;
    });
    if (list.size() > static_cast<std::size_t>(k)) list.resize(static_cast<std::size_t>(k));
  }
  return by_plant;
}

namespace {

std::vector<double> scores_of(std::span<const ScoredRow> rows, const std::string* plant) {
  std::vector<double> out;
  for (const auto& row : rows) {
    if (!row.risk.ops_risk) continue;
    if (plant && row.record.plant_id != *plant) continue;
    out.push_back(*row.risk.ops_risk);
  }
  return out;
}

}  // namespace

DriftReport drift_report(std::span<const ScoredRow> reference, std::span<const ScoredRow> current,
                         const ThresholdSet& thresholds, const DriftOptions& opt) {
  DriftReport rep;
  rep.thresholds = thresholds;
  rep.options = opt;
  std::set<std::string> plants;
  for (const auto& row : reference) plants.insert(row.record.plant_id);
  for (const auto& plant : plants) {
    const auto ref = scores_of(reference, &plant);
    const auto cur = scores_of(current, &plant);
    if (ref.empty() || cur.empty()) continue;
    rep.per_plant.push_back({plant, psi(ref, cur, opt.n_bins, opt.eps), ks_distance(ref, cur), ref.size(), cur.size()});
  }
  const auto ref_all = scores_of(reference, nullptr);
  const auto cur_all = scores_of(current, nullptr);
  if (!ref_all.empty() && !cur_all.empty()) {
    rep.pooled = PlantDrift{"*", psi(ref_all, cur_all, opt.n_bins, opt.eps), ks_distance(ref_all, cur_all),
                            ref_all.size(), cur_all.size()};
  }
  rep.monthly_alert_rates = monthly_alert_rates(current, thresholds);
  rep.topk = topk_events(current, opt.k);
  return rep;
}

nlohmann::ordered_json to_json(const MonthlyRate& r) {
  return {{"plant_id", r.plant_id}, {"month", r.month}, {"n", r.n}, {"rate_watch", r.rate_watch},
          {"rate_action", r.rate_action}};
}

nlohmann::ordered_json to_json(std::span<const MonthlyRate> rates) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rates) j.push_back(to_json(r));
  return j;
}

nlohmann::ordered_json event_json(const ScoredRow& row) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  const auto& r = row.record;
  nlohmann::ordered_json j;
  j["plant_id"] = r.plant_id;
  j["t"] = format_date(r.timestamp);
  j["group_key"] = r.group_key;
  j["hab_prob"] = opt(r.hab_prob);
  j["ops_risk"] = opt(row.risk.ops_risk);
  j["state"] = row.state ? nlohmann::ordered_json(std::string(to_string(*row.state))) : nlohmann::ordered_json(nullptr);
  j["det_mean"] = opt(r.det_mean);
  j["oci_adj"] = row.risk.oci_adj;
  j["season_adj"] = row.risk.season_adj;
  j["used_fallback"] = row.risk.used_fallback;
  j["chlor_a"] = opt(r.chlor_a);
  j["kd490"] = opt(r.kd490);
  j["nflh"] = opt(r.nflh);
  j["sst"] = opt(r.sst);
  j["fai_mean"] = opt(r.fai_mean);
  j["ndwi_mean"] = opt(r.ndwi_mean);
  j["rednir_mean"] = opt(r.rednir_mean);
  return j;
}

nlohmann::ordered_json to_json(const DriftReport& r) {
  auto plant_json = [](const PlantDrift& p) {
    return nlohmann::ordered_json{{"plant_id", p.plant_id}, {"psi", p.psi}, {"ks", p.ks}, {"n_ref", p.n_ref},
                                  {"n_cur", p.n_cur}};
  };
  nlohmann::ordered_json j;
  j["metadata"] = {{"psi_binning", "reference_deciles"},
                   {"n_bins", r.options.n_bins},
                   {"eps", r.options.eps},
                   {"score", "ops_risk"},
                   {"k", r.options.k}};
  auto& plants = j["per_plant"] = nlohmann::ordered_json::array();
  for (const auto& p : r.per_plant) plants.push_back(plant_json(p));
  j["pooled"] = r.pooled ? plant_json(*r.pooled) : nlohmann::ordered_json(nullptr);
  j["thresholds"] = to_json(r.thresholds);
  j["monthly_alert_rates"] = to_json(std::span<const MonthlyRate>(r.monthly_alert_rates));
  auto& topk = j["topk"] = nlohmann::ordered_json::object();
  for (const auto& [plant, rows] : r.topk) {
    auto& list = topk[plant] = nlohmann::ordered_json::array();
    for (const auto& row : rows) list.push_back(event_json(row));
  }
  return j;
}

}  // namespace rednet::drift
