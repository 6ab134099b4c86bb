// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "diva/tensor.hpp"

namespace diva {

/// Counter-based random stream. The n-th draw of stream (seed, index) is a
/// pure function of (seed, index, n), so streams can be handed to samples
/// in any order and still reproduce the same numbers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index) : seed_(seed), stream_(stream_index) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [lo, hi], inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  /// Standard normal (Box-Muller, two words per draw).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream keyed by `key`; does not advance this stream.
  RngStream split(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// i.i.d. N(0, 1) tensor drawn from `rng`.
Tensor sample_gaussian(const Shape& shape, RngStream& rng);

}  // namespace diva
