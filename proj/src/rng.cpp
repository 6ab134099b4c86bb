// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/rng.hpp"

#include <cmath>

#include "diva/error.hpp"

namespace diva {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t key = mix64(seed_ ^ mix64(stream_ ^ 0x6a09e667f3bcc909ULL));
  std::uint64_t n = counter_++;
  return mix64(key ^ mix64(n + 0x3c6ef372fe94f82bULL));
}

double RngStream::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) throw RangeError("uniform_int: empty range");
  std::uint64_t span = hi - lo + 1;
  if (span == 0) return next_u64();
  // Rejection keeps the draw exactly uniform.
  std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + v % span;
}

double RngStream::normal() {
  double u1 = (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  double u2 = double(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

RngStream RngStream::split(std::uint64_t key) const {
  return RngStream(seed_, mix64(stream_ ^ mix64(key + 0xa54ff53a5f1d36f1ULL)));
}

Tensor sample_gaussian(const Shape& shape, RngStream& rng) {
  std::vector<double> data(shape_size(shape));
  for (auto& v : data) v = rng.normal();
  return Tensor(shape, std::move(data));
}

}  // namespace diva
