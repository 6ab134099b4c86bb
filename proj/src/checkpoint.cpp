// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace diva {

namespace {

constexpr char kMagic[4] = {'D', 'I', 'V', 'A'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(std::uint8_t(value >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= T(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointError::Kind::Truncated,
                            std::string("truncated checkpoint: missing ") + what + " at byte " + std::to_string(pos_));
    }
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParamSet& params) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, std::uint32_t(params.size()));
  for (const auto& [name, t] : params) {
    put_le<std::uint32_t>(out, std::uint32_t(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_le<std::uint32_t>(out, std::uint32_t(t.rank()));
    for (auto d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ParamSet decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw CheckpointError(CheckpointError::Kind::Truncated, "truncated checkpoint: missing magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointError::Kind::BadMagic, "bad magic: not a DIVA checkpoint");
  }
  std::vector<std::uint8_t> body(bytes.begin() + 4, bytes.end());
  Reader r(body);
  auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "version mismatch: checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  auto count = r.get<std::uint32_t>("entry count");
  ParamSet out;
  for (std::uint32_t e = 0; e < count; ++e) {
    auto name_len = r.get<std::uint32_t>("name length");
    std::string name = r.get_string(name_len, "name");
    auto rank = r.get<std::uint32_t>("rank");
    // Every dim takes 8 bytes, so a rank larger than the rest of the file
    // cannot be valid.
    r.need(std::size_t(rank) * 8, "dims");
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = r.get<std::uint64_t>("dim");
      if (d == 0) throw CheckpointError(CheckpointError::Kind::Malformed, "zero dimension in entry '" + name + "'");
      if (n > r.remaining() / d) {
        throw CheckpointError(CheckpointError::Kind::Truncated, "truncated checkpoint: entry '" + name + "' data");
      }
      n *= d;
    }
    r.need(n * 8, "tensor data");
    std::vector<double> data(n);
    for (auto& v : data) v = std::bit_cast<double>(r.get<std::uint64_t>("value"));
    if (out.contains(name)) throw CheckpointError(CheckpointError::Kind::Malformed, "duplicate entry '" + name + "'");
    out.set(name, Tensor(std::move(shape), std::move(data)));
  }
  if (r.remaining() != 0) {
    throw CheckpointError(CheckpointError::Kind::Malformed,
                          std::to_string(r.remaining()) + " trailing bytes after the last entry");
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  write_file_atomic(path, encode_checkpoint(params));
}

ParamSet read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace diva
