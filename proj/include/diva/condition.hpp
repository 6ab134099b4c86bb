// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "diva/encoder.hpp"

namespace diva {

/// How many patch tokens join the class token in the denoiser condition.
struct RecapStrategy {
  enum class Kind { ClassOnly, RandomSubset, PooledWindow, All };

  Kind kind = Kind::RandomSubset;
  double probability = 0.15;  // RandomSubset
  std::size_t window = 6;     // PooledWindow

  static RecapStrategy class_only() { return {Kind::ClassOnly, 0.0, 0}; }
  static RecapStrategy random_subset(double p) { return {Kind::RandomSubset, p, 0}; }
  static RecapStrategy pooled_window(std::size_t k) { return {Kind::PooledWindow, 0.0, k}; }
  static RecapStrategy all() { return {Kind::All, 1.0, 0}; }

  /// Throws RangeError unless 0 < p <= 1 (RandomSubset) and k >= 1 (PooledWindow).
  void validate() const;

  /// "class", "random:0.15", "pooled:6" or "all".
  std::string name() const;
  /// Accepts name() spellings plus the shorthand used on the command line:
  /// a bare probability ("0.3") and "pool6".
  static RecapStrategy parse(std::string_view text);
};

/// Fixed begin/end vectors framing every condition, standing in for the
/// embeddings of an empty caption.
struct Sentinels {
  Tensor bos;  // [1 x dim]
  Tensor eos;  // [1 x dim]

  static Sentinels make(std::size_t dim, std::uint64_t seed);
  static Sentinels from_params(const ParamSet& params);
  void store(ParamSet& params) const;
};

/// [BOS, class, recapped patch tokens..., EOS] as a [length x dim] var.
class Condition {
 public:
  explicit Condition(Var tokens) : tokens_(std::move(tokens)) {}

  const Var& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.value().dim(0); }
  std::size_t embed_dim() const { return tokens_.value().dim(1); }

 private:
  Var tokens_;
};

/// Patch indices kept by `strategy` (RandomSubset consumes one uniform
/// draw per patch; other strategies draw nothing).
std::vector<std::size_t> select_patches(const RecapStrategy& strategy, std::size_t num_patches, RngStream& rng);

Condition build_condition(const TokenSequence& ts, const RecapStrategy& strategy, RngStream& rng,
                          const Sentinels& sentinels);

/// Expected number of patch-derived tokens in the condition.
double expected_density(const RecapStrategy& strategy, std::size_t num_patches);

}  // namespace diva
