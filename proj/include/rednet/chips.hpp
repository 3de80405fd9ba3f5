#pragma once

// Chip stack file format.
//
// A stack is two files: a raw binary of little-endian IEEE-754 float32 values
// and a JSON sidecar describing it:
//
//   {
//     "format": "rednet-chips/1",
//     "count": 3, "height": 64, "width": 64,
//     "bands": ["green", "red", "nir", "swir", "mask"],
//     "chip_ids": ["A_2024-03-15", ...],                 (optional)
//     "wavelengths_nm": {"red": 665, "nir": 842, "swir": 1610}   (optional)
//   }
//
// Values are ordered chip-major, then band in sidecar order, then row-major
// pixels: offset(c, b, y, x) = ((c * n_bands + b) * height + y) * width + x,
// in units of 4 bytes. The file size must be exactly count*n_bands*height*width*4.
// "green", "red", "nir" and "swir" are required; "mask" is optional (nonzero
// means valid water pixel, absent means every pixel is valid). Unknown band
// names are skipped.

#include <iosfwd>
#include <string>
#include <vector>

#include "rednet/indices.hpp"

namespace rednet::chips {

struct ChipStack {
  std::vector<std::string> chip_ids;
  std::vector<indices::ChipBands> chips;
  indices::FaiWavelengths wavelengths;
};

// Reads `bin_path` with its sidecar at `sidecar_path` (defaults to
// bin_path + ".json"). Throws std::runtime_error on malformed input.
ChipStack read_stack(const std::string& bin_path, const std::string& sidecar_path = {});

// Writes the stack in the documented layout with bands green, red, nir, swir,
// mask.
void write_stack(const ChipStack& stack, const std::string& bin_path, const std::string& sidecar_path = {});

// CSV with one row per chip: chip_id then, for each of ndwi, fai and rednir,
// n_valid, mean, sd, q10, q50, q90. Absent statistics are empty cells.
void write_summaries(std::ostream& out, const ChipStack& stack);

}  // namespace rednet::chips
