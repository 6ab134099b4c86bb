// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "diva/error.hpp"
#include "diva/params.hpp"

namespace diva {

// Binary layout, all integers little-endian:
//   "DIVA" | u32 version | u32 entry count
//   per entry: u32 name length | UTF-8 name | u32 rank | rank x u64 dims |
//              product(dims) x f64 (IEEE-754, little-endian)
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public FormatError {
 public:
  enum class Kind { BadMagic, VersionMismatch, Truncated, Malformed };

  CheckpointError(Kind kind, const std::string& what) : FormatError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> encode_checkpoint(const ParamSet& params);
/// Parses the whole buffer before returning; nothing is returned on error.
ParamSet decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Writes via a temporary file and rename.
void write_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet read_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace diva
