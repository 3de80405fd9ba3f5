#include "rednet/indices.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rednet/stats.hpp"

namespace rednet::indices {

std::optional<double> ndwi(double green, double nir) {
  const double denom = green + nir;
  if (denom == 0.0) return std::nullopt;
  return (green - nir) / denom;
}

double fai(double red, double nir, double swir, const FaiWavelengths& wl) {
  if (!(wl.red < wl.nir && wl.nir < wl.swir)) {
    throw std::invalid_argument("FAI wavelengths must satisfy red < nir < swir");
  }
  const double baseline = red + (swir - red) * (wl.nir - wl.red) / (wl.swir - wl.red);
  return nir - baseline;
}

std::optional<double> rednir_ratio(double red, double nir) {
  if (!(nir > 0.0)) return std::nullopt;
  return red / nir;
}

IndexSummary summarize_index(std::span<const double> values, std::span<const std::uint8_t> mask) {
  if (values.size() != mask.size()) throw std::invalid_argument("value grid and mask differ in size");
  std::vector<double> valid;
  valid.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i] && std::isfinite(values[i])) valid.push_back(values[i]);
  }
  IndexSummary s;
  s.n_valid = valid.size();
  if (valid.empty()) return s;
  std::sort(valid.begin(), valid.end());
  s.mean = stats::mean(valid);
  s.sd = stats::sample_sd(valid);
  s.q10 = stats::quantile_linear(valid, 0.10);
  s.q50 = stats::quantile_linear(valid, 0.50);
  s.q90 = stats::quantile_linear(valid, 0.90);
  return s;
}

void ChipBands::check() const {
  const std::size_t n = size();
  auto check_band = [n](const std::vector<float>& band, const char* name) {
    if (band.size() != n) {
      throw std::invalid_argument(std::string("band ") + name + " has " + std::to_string(band.size()) +
                                  " pixels, expected " + std::to_string(n));
    }
    for (float v : band) {
      if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite reflectance in band ") + name);
    }
  };
  check_band(green, "green");
  check_band(red, "red");
  check_band(nir, "nir");
  check_band(swir, "swir");
  if (valid_mask.size() != n) throw std::invalid_argument("mask size differs from chip size");
}

ChipSummary summarize_chip(const ChipBands& chip, const FaiWavelengths& wl) {
  chip.check();
  const std::size_t n = chip.size();
  std::vector<double> nd(n, 0.0), fa(n, 0.0), rn(n, 0.0);
  std::vector<std::uint8_t> nd_ok(n, 0), fa_ok(n, 0), rn_ok(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!chip.valid_mask[i]) continue;
    if (auto v = ndwi(chip.green[i], chip.nir[i])) {
      nd[i] = *v;
      nd_ok[i] = 1;
    }
    fa[i] = fai(chip.red[i], chip.nir[i], chip.swir[i], wl);
    fa_ok[i] = 1;
    if (auto v = rednir_ratio(chip.red[i], chip.nir[i])) {
      rn[i] = *v;
      rn_ok[i] = 1;
    }
  }
  return {summarize_index(nd, nd_ok), summarize_index(fa, fa_ok), summarize_index(rn, rn_ok)};
}

}  // namespace rednet::indices
