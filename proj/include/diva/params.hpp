// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>

#include "diva/autodiff.hpp"
#include "diva/rng.hpp"

namespace diva {

/// Named parameter tensors, iterated in name order.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor, std::less<>>;

  void set(std::string name, Tensor value);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }
  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  std::size_t scalar_count() const;

  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  /// Entries whose name starts with `prefix`.
  ParamSet with_prefix(std::string_view prefix) const;
  /// Adds every entry of `other`, replacing duplicates.
  void merge(const ParamSet& other);

  /// Same names, shapes and bitwise-identical values.
  bool bit_equal(const ParamSet& other) const;

 private:
  Map params_;
};

/// Parameters bound to a tape as leaves.
class BoundParams {
 public:
  /// `trainable` marks every leaf grad-enabled; otherwise they are constants.
  BoundParams(Tape& tape, const ParamSet& params, bool trainable);

  const Var& operator[](std::string_view name) const;
  bool trainable() const { return trainable_; }

  /// Gradients of the bound leaves, keyed by parameter name.
  ParamSet gradients(const Gradients& grads) const;

 private:
  std::map<std::string, Var, std::less<>> vars_;
  bool trainable_;
};

/// N(0, std^2) initial values.
Tensor normal_init(const Shape& shape, double std, RngStream& rng);

}  // namespace diva
