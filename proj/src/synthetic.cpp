#include "rednet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "rednet/csv.hpp"
#include "rednet/ingest.hpp"
#include "rednet/stats.hpp"

namespace rednet {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

bool Rng::bernoulli(double p) { return uniform() < p; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire-free rejection keeps this simple and unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

const std::vector<Envelope>& table_envelope() {
  static const std::vector<Envelope> env{
      {"chlor_a", 0.044, 9.972},   {"kd490", 0.019, 2.244},     {"nflh", -0.026, 0.736},
      {"sst", 23.945, 32.995},     {"fai_mean", -0.073, 0.084}, {"ndwi_mean", -0.393, 0.068},
      {"rednir_mean", 0.367, 1.088},
  };
  return env;
}

namespace {

const Envelope& envelope(std::string_view column) {
  for (const auto& e : table_envelope()) {
    if (column == e.column) return e;
  }
  throw std::out_of_range("no envelope for " + std::string(column));
}

struct PlantProfile {
  double chl_scale;   // multiplies baseline chlorophyll
  double sst_offset;  // degC
  double shift_chl;   // baseline multiplier in the shifted period
  double shift_tail;  // bloom intensity multiplier in the shifted period
};

PlantProfile profile_for(std::size_t i) {
  static const PlantProfile profiles[] = {
      {1.00, 0.0, 0.55, 1.6},
      {1.20, 0.4, 0.65, 1.4},
      {0.85, -0.3, 0.50, 1.8},
      {1.05, 0.2, 0.60, 1.5},
  };
  return profiles[i % 4];
}

// Winter-peaked bloom seasonality, normalized to mean 1 over the year.
double season_weight(int month) {
  return 1.0 + 0.8 * std::cos(2.0 * std::numbers::pi * (month - 1) / 12.0);
}

}  // namespace

std::vector<SampleRecord> generate_synthetic(const SyntheticConfig& cfg) {
  Rng rng(cfg.seed);
  const Date start = parse_date(cfg.start);
  const Date end = parse_date(cfg.end);
  const Date shift = parse_date(cfg.shift_start);

  // Plants are grouped two per tile; one overpass covers both, so they share a
  // scene group key.
  struct Tile {
    std::string name;
    std::vector<std::size_t> plants;
  };
  std::vector<Tile> tiles;
  for (std::size_t p = 0; p < cfg.plants.size(); ++p) {
    if (p % 2 == 0) tiles.push_back({"T40Q" + std::string(1, static_cast<char>('A' + p / 2)), {}});
    tiles.back().plants.push_back(p);
  }

  // Bloom episodes: a two-state Markov chain per plant with mean duration
  // `mean_len` days, started at a seasonally modulated daily hazard chosen so
  // the stationary fraction of bloom days equals cfg.bloom_prevalence.
  const double mean_len = 9.0;
  const double stop_p = 1.0 / mean_len;
  const double base_start = cfg.bloom_prevalence * stop_p / (1.0 - cfg.bloom_prevalence);
  const auto n_days = static_cast<std::size_t>((end - start).count() + 1);
  std::vector<std::vector<double>> intensity(cfg.plants.size(), std::vector<double>(n_days, 0.0));
  for (std::size_t p = 0; p < cfg.plants.size(); ++p) {
    bool on = false;
    double level = 0.0;
    for (std::size_t d = 0; d < n_days; ++d) {
      Date day = start + std::chrono::days(d);
      if (on) {
        if (rng.bernoulli(stop_p)) on = false;
      } else if (rng.bernoulli(std::min(0.9, base_start * season_weight(month_of(day))))) {
        on = true;
        level = std::exp(rng.normal(0.0, 0.35));
        if (day >= shift) level *= profile_for(p).shift_tail;
      }
      intensity[p][d] = on ? level : 0.0;
    }
  }

  auto clip_to = [&](std::string_view column, double v) {
    const auto& e = envelope(column);
    if (rng.bernoulli(cfg.envelope_outliers)) {
      double pad = 0.05 * (e.hi - e.lo);
      v = rng.uniform(e.lo - pad, e.hi + pad);
    }
    return std::clamp(v, e.lo, e.hi);
  };
  auto maybe = [&](double p_missing, double v) -> OptDouble {
    if (rng.bernoulli(p_missing)) return std::nullopt;
    return v;
  };

  std::vector<SampleRecord> out;
  std::vector<int> tile_phase(tiles.size(), 0);
  for (std::size_t t = 0; t < tiles.size(); ++t) tile_phase[t] = static_cast<int>(t);

  for (std::size_t d = 0; d < n_days; ++d) {
    Date day = start + std::chrono::days(d);
    const int month = month_of(day);
    const double season = std::sin(2.0 * std::numbers::pi * (month - 4) / 12.0);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
      // Revisit every 2 or 3 days, alternating (mean 2.5 days).
      int cycle = static_cast<int>(d) + tile_phase[t];
      if (cycle % 5 != 0 && cycle % 5 != 2) continue;
      if (rng.bernoulli(cfg.cloud_dropout)) continue;
      const std::string group = tiles[t].name + "_" + format_date(day);
      for (std::size_t p : tiles[t].plants) {
        const PlantProfile prof = profile_for(p);
        const double bloom = intensity[p][d];
        const bool blooming = bloom > 0.0;
        const double base_mult = day >= shift ? prof.shift_chl : 1.0;

        SampleRecord r;
        r.plant_id = cfg.plants[p];
        r.timestamp = day;
        r.month = month;
        r.group_key = group;

        double chl = 0.2 * prof.chl_scale * base_mult * std::exp(rng.normal(0.0, 0.7));
        if (blooming) chl *= std::exp(rng.normal(1.9, 0.5)) * bloom;
        chl = clip_to("chlor_a", chl);
        double kd = clip_to("kd490", 0.016 + 0.0773 * std::pow(chl, 0.67) * std::exp(rng.normal(0.0, 0.15)));
        double fl = clip_to("nflh", rng.normal(0.10, 0.085) + (blooming ? rng.normal(0.22, 0.1) * bloom : 0.0));
        double sst = clip_to("sst", 28.0 + prof.sst_offset + 3.0 * season + rng.normal(0.0, 1.0) +
                                        (blooming ? 0.6 : 0.0));
        r.chlor_a = maybe(cfg.driver_missing, chl);
        r.kd490 = maybe(cfg.driver_missing, kd);
        r.nflh = maybe(cfg.driver_missing, fl);
        r.sst = maybe(cfg.driver_missing / 2, sst);

        double fai = clip_to("fai_mean", rng.normal(0.022, 0.02) + (blooming ? rng.normal(0.025, 0.01) : 0.0));
        double ndwi = clip_to("ndwi_mean", rng.normal(-0.15, 0.06) - (blooming ? 0.04 : 0.0));
        double rednir = clip_to("rednir_mean", rng.normal(0.885, 0.04) + (blooming ? 0.03 : 0.0));
        r.fai_mean = fai;
        r.ndwi_mean = ndwi;
        r.rednir_mean = rednir;

        double det = stats::logistic(blooming ? rng.normal(1.0, 1.1) : rng.normal(-1.6, 1.0));
        r.det_mean = maybe(cfg.det_missing, det);

        if (rng.bernoulli(cfg.trusted_fraction)) {
          bool label = blooming;
          if (rng.bernoulli(0.03)) label = !label;
          r.y_trusted = label ? 1 : 0;
        }
        out.push_back(std::move(r));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SampleRecord& a, const SampleRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.plant_id < b.plant_id;
  });
  return out;
}

void write_with_zero_placeholders(std::ostream& out, const std::vector<SampleRecord>& records) {
  std::vector<std::string> cells(kTableColumns.begin(), kTableColumns.end());
  csv::write_row(out, cells);
  for (const auto& r : records) {
    auto raw = serialize_record(r);
    for (const char* col : {"chlor_a", "kd490", "nflh"}) {
      auto& cell = raw[col];
      if (cell.empty()) cell = "0";
    }
    for (std::size_t c = 0; c < kTableColumns.size(); ++c) cells[c] = raw.find(kTableColumns[c])->second;
    csv::write_row(out, cells);
  }
}

}  // namespace rednet
