#include "rednet/chips.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "rednet/csv.hpp"
#include "rednet/record.hpp"

namespace rednet::chips {

namespace {

float decode_le(const unsigned char* p) {
  std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                    (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

void encode_le(float v, unsigned char* p) {
  auto u = std::bit_cast<std::uint32_t>(v);
  p[0] = static_cast<unsigned char>(u & 0xFF);
  p[1] = static_cast<unsigned char>((u >> 8) & 0xFF);
  p[2] = static_cast<unsigned char>((u >> 16) & 0xFF);
  p[3] = static_cast<unsigned char>((u >> 24) & 0xFF);
}

std::string sidecar_for(const std::string& bin, const std::string& sidecar) {
  return sidecar.empty() ? bin + ".json" : sidecar;
}

}  // namespace

ChipStack read_stack(const std::string& bin_path, const std::string& sidecar_path) {
  const std::string meta_path = sidecar_for(bin_path, sidecar_path);
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw std::runtime_error("cannot open chip sidecar " + meta_path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed chip sidecar: " + std::string(e.what()));
  }
  if (meta.value("format", std::string("rednet-chips/1")) != "rednet-chips/1") {
    throw std::runtime_error("unsupported chip format: " + meta.at("format").get<std::string>());
  }

  ChipStack stack;
  std::size_t count = 0, height = 0, width = 0;
  std::vector<std::string> bands;
  try {
    count = meta.at("count").get<std::size_t>();
    height = meta.at("height").get<std::size_t>();
    width = meta.at("width").get<std::size_t>();
    bands = meta.at("bands").get<std::vector<std::string>>();
    if (meta.contains("chip_ids")) stack.chip_ids = meta.at("chip_ids").get<std::vector<std::string>>();
    if (meta.contains("wavelengths_nm")) {
      const auto& wl = meta.at("wavelengths_nm");
      stack.wavelengths.red = wl.value("red", stack.wavelengths.red);
      stack.wavelengths.nir = wl.value("nir", stack.wavelengths.nir);
      stack.wavelengths.swir = wl.value("swir", stack.wavelengths.swir);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed chip sidecar: " + std::string(e.what()));
  }
  for (const char* required : {"green", "red", "nir", "swir"}) {
    if (std::find(bands.begin(), bands.end(), required) == bands.end()) {
      throw std::runtime_error(std::string("chip sidecar lacks required band ") + required);
    }
  }
  if (stack.chip_ids.empty()) {
    for (std::size_t c = 0; c < count; ++c) stack.chip_ids.push_back("chip_" + std::to_string(c));
  }
  if (stack.chip_ids.size() != count) throw std::runtime_error("chip_ids length differs from count");

  const std::size_t plane = height * width;
  const std::size_t expected = count * bands.size() * plane * 4;
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open chip binary " + bin_path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected) {
    throw std::runtime_error("chip binary is " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(expected));
  }

  std::size_t off = 0;
  for (std::size_t c = 0; c < count; ++c) {
    indices::ChipBands chip;
    chip.width = width;
    chip.height = height;
    chip.valid_mask.assign(plane, 1);
    for (const auto& band : bands) {
      std::vector<float> values(plane);
      for (std::size_t i = 0; i < plane; ++i, off += 4) values[i] = decode_le(bytes.data() + off);
      if (band == "green") chip.green = std::move(values);
      else if (band == "red") chip.red = std::move(values);
      else if (band == "nir") chip.nir = std::move(values);
      else if (band == "swir") chip.swir = std::move(values);
      else if (band == "mask") {
        for (std::size_t i = 0; i < plane; ++i) chip.valid_mask[i] = values[i] != 0.0f ? 1 : 0;
      }
    }
    stack.chips.push_back(std::move(chip));
  }
  return stack;
}

void write_stack(const ChipStack& stack, const std::string& bin_path, const std::string& sidecar_path) {
  if (stack.chips.empty()) throw std::invalid_argument("empty chip stack");
  const auto& first = stack.chips.front();
  nlohmann::ordered_json meta;
  meta["format"] = "rednet-chips/1";
  meta["count"] = stack.chips.size();
  meta["height"] = first.height;
  meta["width"] = first.width;
  meta["bands"] = {"green", "red", "nir", "swir", "mask"};
  meta["chip_ids"] = stack.chip_ids;
  meta["wavelengths_nm"] = {{"red", stack.wavelengths.red},
                            {"nir", stack.wavelengths.nir},
                            {"swir", stack.wavelengths.swir}};

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + bin_path);
  unsigned char buf[4];
  for (const auto& chip : stack.chips) {
    chip.check();
    if (chip.width != first.width || chip.height != first.height) {
      throw std::invalid_argument("chips in a stack must share dimensions");
    }
    for (const auto* band : {&chip.green, &chip.red, &chip.nir, &chip.swir}) {
      for (float v : *band) {
        encode_le(v, buf);
        bin.write(reinterpret_cast<const char*>(buf), 4);
      }
    }
    for (auto m : chip.valid_mask) {
      encode_le(m ? 1.0f : 0.0f, buf);
      bin.write(reinterpret_cast<const char*>(buf), 4);
    }
  }
  std::ofstream side(sidecar_for(bin_path, sidecar_path));
  side << meta.dump(2) << '\n';
}

void write_summaries(std::ostream& out, const ChipStack& stack) {
  std::vector<std::string> header{"chip_id"};
  for (const char* idx : {"ndwi", "fai", "rednir"}) {
    for (const char* stat : {"n_valid", "mean", "sd", "q10", "q50", "q90"}) {
      header.push_back(std::string(idx) + "_" + stat);
    }
  }
  csv::write_row(out, header);
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; };
  for (std::size_t c = 0; c < stack.chips.size(); ++c) {
    auto summary = indices::summarize_chip(stack.chips[c], stack.wavelengths);
    std::vector<std::string> row{stack.chip_ids[c]};
    for (const auto* s : {&summary.ndwi, &summary.fai, &summary.rednir}) {
      row.push_back(std::to_string(s->n_valid));
      row.push_back(opt(s->mean));
      row.push_back(opt(s->sd));
      row.push_back(opt(s->q10));
      row.push_back(opt(s->q50));
      row.push_back(opt(s->q90));
    }
    csv::write_row(out, row);
  }
}

}  // namespace rednet::chips
