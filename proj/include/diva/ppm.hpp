// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "diva/error.hpp"
#include "diva/synthbench.hpp"

namespace diva {

class PpmError : public FormatError {
 public:
  enum class Kind { NotP6, BadMaxval, DimensionMismatch, Truncated, Malformed };

  PpmError(Kind kind, const std::string& what) : FormatError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct PpmSize {
  std::size_t width;
  std::size_t height;
};

/// Binary P6 with maxval 255. Header comments are accepted on input.
synth::Raster decode_ppm(const std::vector<std::uint8_t>& bytes, std::optional<PpmSize> expected = {});
/// Canonical header "P6\n<w> <h>\n255\n" followed by the pixel bytes.
std::vector<std::uint8_t> encode_ppm(const synth::Raster& raster);

synth::Raster read_ppm_raster(const std::filesystem::path& path, std::optional<PpmSize> expected = {});
/// Pixels mapped linearly from [0, 255] onto [-1, 1].
Image read_ppm(const std::filesystem::path& path, std::optional<PpmSize> expected = {});

void write_ppm(const std::filesystem::path& path, const synth::Raster& raster);
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace diva
