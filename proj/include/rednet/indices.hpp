#pragma once

// Spectral water/algae indices over chip pixel grids, reduced to the masked
// robust summaries that feed the training table.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rednet::indices {

// McFeeters NDWI, (green - nir) / (green + nir). Empty when green + nir == 0.
std::optional<double> ndwi(double green, double nir);

// Band-centre wavelengths in nm. Defaults are Sentinel-2 B4/B8/B11.
struct FaiWavelengths {
  double red = 665.0;
  double nir = 842.0;
  double swir = 1610.0;
};

// NIR minus the red-SWIR linear baseline interpolated at the NIR wavelength.
// Throws std::invalid_argument unless red < nir < swir wavelengths.
double fai(double red, double nir, double swir, const FaiWavelengths& wl = {});

// red / nir. Empty when nir <= 0.
std::optional<double> rednir_ratio(double red, double nir);

struct IndexSummary {
  std::size_t n_valid = 0;
  // All absent when n_valid == 0.
  std::optional<double> mean, sd, q10, q50, q90;
};

// Statistics over pixels whose mask entry is nonzero and whose value is
// finite. Quantiles interpolate linearly between order statistics; sd is the
// sample standard deviation.
IndexSummary summarize_index(std::span<const double> values, std::span<const std::uint8_t> mask);

struct ChipBands {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> green, red, nir, swir;
  std::vector<std::uint8_t> valid_mask;  // 1 = valid water pixel

  std::size_t size() const { return width * height; }
  // Throws std::invalid_argument when a grid's size differs from width*height
  // or a reflectance value is not finite.
  void check() const;
};

struct ChipSummary {
  IndexSummary ndwi;
  IndexSummary fai;
  IndexSummary rednir;
};

ChipSummary summarize_chip(const ChipBands& chip, const FaiWavelengths& wl = {});

}  // namespace rednet::indices
