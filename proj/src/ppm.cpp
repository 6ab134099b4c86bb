// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/ppm.hpp"

#include <cctype>

#include "diva/checkpoint.hpp"

namespace diva {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw PpmError(PpmError::Kind::Truncated, std::string("ppm: truncated before ") + what);
    if (!std::isdigit(bytes_[pos_])) throw PpmError(PpmError::Kind::Malformed, std::string("ppm: bad ") + what);
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + std::size_t(bytes_[pos_] - '0');
      if (value > (1u << 24)) throw PpmError(PpmError::Kind::Malformed, std::string("ppm: ") + what + " too large");
      ++pos_;
    }
    return value;
  }

  std::size_t& pos() { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

synth::Raster decode_ppm(const std::vector<std::uint8_t>& bytes, std::optional<PpmSize> expected) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw PpmError(PpmError::Kind::NotP6, "ppm: not a binary P6 file");
  }
  HeaderReader h(bytes);
  h.pos() = 2;
  if (h.pos() < bytes.size() && !std::isspace(bytes[h.pos()]) && bytes[h.pos()] != '#') {
    throw PpmError(PpmError::Kind::NotP6, "ppm: not a binary P6 file");
  }
  std::size_t width = h.number("width");
  std::size_t height = h.number("height");
  std::size_t maxval = h.number("maxval");
  if (maxval != 255) throw PpmError(PpmError::Kind::BadMaxval, "ppm: maxval " + std::to_string(maxval) + " != 255");
  if (width == 0 || height == 0) throw PpmError(PpmError::Kind::Malformed, "ppm: zero dimension");
  if (expected && (expected->width != width || expected->height != height)) {
    throw PpmError(PpmError::Kind::DimensionMismatch,
                   "ppm: image is " + std::to_string(width) + "x" + std::to_string(height) + ", config expects " +
                       std::to_string(expected->width) + "x" + std::to_string(expected->height));
  }
  if (h.pos() >= bytes.size() || !std::isspace(bytes[h.pos()])) {
    throw PpmError(PpmError::Kind::Truncated, "ppm: missing separator before pixel data");
  }
  std::size_t start = h.pos() + 1;
  std::size_t n = width * height * 3;
  if (bytes.size() - start < n) throw PpmError(PpmError::Kind::Truncated, "ppm: truncated pixel data");
  if (bytes.size() - start > n) throw PpmError(PpmError::Kind::Malformed, "ppm: trailing bytes after pixel data");
  synth::Raster r;
  r.width = width;
  r.height = height;
  r.rgb.assign(bytes.begin() + std::ptrdiff_t(start), bytes.end());
  return r;
}

std::vector<std::uint8_t> encode_ppm(const synth::Raster& raster) {
  if (raster.rgb.size() != raster.width * raster.height * 3) throw ShapeError("ppm: raster size mismatch");
  std::string header = "P6\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.rgb.begin(), raster.rgb.end());
  return out;
}

synth::Raster read_ppm_raster(const std::filesystem::path& path, std::optional<PpmSize> expected) {
  return decode_ppm(read_file(path), expected);
}

Image read_ppm(const std::filesystem::path& path, std::optional<PpmSize> expected) {
  return synth::to_image(read_ppm_raster(path, expected));
}

void write_ppm(const std::filesystem::path& path, const synth::Raster& raster) {
  write_file_atomic(path, encode_ppm(raster));
}

void write_ppm(const std::filesystem::path& path, const Image& image) { write_ppm(path, synth::to_raster(image)); }

}  // namespace diva
