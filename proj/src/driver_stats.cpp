#include "rednet/driver_stats.hpp"

#include <algorithm>
#include <vector>

#include "rednet/stats.hpp"

namespace rednet {

const std::optional<MonthlyCell>& MonthlyStats::cell(Driver d, int month) const {
  static const std::optional<MonthlyCell> none;
  if (month < 1 || month > 12) return none;
  return cells[static_cast<int>(d)][static_cast<std::size_t>(month - 1)];
}

MonthlyStats fit_monthly_stats(std::span<const SampleRecord> records) {
  MonthlyStats out;
  std::array<std::array<std::vector<double>, 12>, 4> pools;
  for (const auto& r : records) {
    for (Driver d : kDrivers) {
      if (auto v = r.driver(d)) pools[static_cast<int>(d)][static_cast<std::size_t>(r.month - 1)].push_back(*v);
    }
  }
  for (int d = 0; d < 4; ++d) {
    for (int m = 0; m < 12; ++m) {
      auto& pool = pools[d][m];
      if (pool.empty()) continue;
      std::sort(pool.begin(), pool.end());
      MonthlyCell c;
      c.median = stats::quantile_higher(pool, 0.5);
      c.iqr = stats::quantile_higher(pool, 0.75) - stats::quantile_higher(pool, 0.25);
      c.n = pool.size();
      out.cells[d][m] = c;
    }
  }
  return out;
}

NormStats fit_norm_stats(std::span<const SampleRecord> records) {
  NormStats out;
  out.monthly = fit_monthly_stats(records);
  for (Driver d : kDrivers) {
    std::vector<double> pool;
    for (const auto& r : records) {
      if (auto v = r.driver(d)) pool.push_back(*v);
    }
    if (pool.empty()) continue;
    std::sort(pool.begin(), pool.end());
    out.range[static_cast<int>(d)] = QuantileRange{stats::quantile_higher(pool, 0.1), stats::quantile_higher(pool, 0.9)};
  }
  return out;
}

double anomaly_z(double x, const MonthlyCell& cell) {
  if (cell.iqr <= 0.0) return 0.0;
  return (x - cell.median) / cell.iqr;
}

nlohmann::ordered_json to_json(const MonthlyStats& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Driver d : kDrivers) {
    nlohmann::ordered_json months = nlohmann::ordered_json::array();
    for (int m = 1; m <= 12; ++m) {
      const auto& c = s.cell(d, m);
      if (!c) {
        months.push_back(nullptr);
      } else {
        months.push_back({{"median", c->median}, {"iqr", c->iqr}, {"n", c->n}});
      }
    }
    j[std::string(driver_name(d))] = std::move(months);
  }
  return j;
}

nlohmann::ordered_json to_json(const NormStats& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json ranges = nlohmann::ordered_json::object();
  for (Driver d : kDrivers) {
    const auto& q = s.of(d);
    ranges[std::string(driver_name(d))] =
        q ? nlohmann::ordered_json{{"q10", q->q10}, {"q90", q->q90}} : nlohmann::ordered_json(nullptr);
  }
  j["quantiles"] = std::move(ranges);
  j["monthly"] = to_json(s.monthly);
  return j;
}

MonthlyStats monthly_stats_from_json(const nlohmann::ordered_json& j) {
  MonthlyStats s;
  for (Driver d : kDrivers) {
    const auto& months = j.at(std::string(driver_name(d)));
    for (std::size_t m = 0; m < 12 && m < months.size(); ++m) {
      if (months[m].is_null()) continue;
      s.cells[static_cast<int>(d)][m] =
          MonthlyCell{months[m].at("median").get<double>(), months[m].at("iqr").get<double>(),
                      months[m].at("n").get<std::size_t>()};
    }
  }
  return s;
}

NormStats norm_stats_from_json(const nlohmann::ordered_json& j) {
  NormStats s;
  const auto& q = j.at("quantiles");
  for (Driver d : kDrivers) {
    const auto& v = q.at(std::string(driver_name(d)));
    if (v.is_null()) continue;
    s.range[static_cast<int>(d)] = QuantileRange{v.at("q10").get<double>(), v.at("q90").get<double>()};
  }
  s.monthly = monthly_stats_from_json(j.at("monthly"));
  return s;
}

}  // namespace rednet
