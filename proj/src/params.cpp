// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/params.hpp"

#include "diva/error.hpp"
#include "diva/ops.hpp"

namespace diva {

void ParamSet::set(std::string name, Tensor value) {
  value.set_grad_enabled(false);
  params_.insert_or_assign(std::move(name), std::move(value));
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

ParamSet ParamSet::with_prefix(std::string_view prefix) const {
  ParamSet out;
  for (const auto& [name, t] : params_) {
    if (name.starts_with(prefix)) out.params_.emplace(name, t);
  }
  return out;
}

void ParamSet::merge(const ParamSet& other) {
  for (const auto& [name, t] : other.params_) params_.insert_or_assign(name, t);
}

bool ParamSet::bit_equal(const ParamSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  auto a = params_.begin();
  auto b = other.params_.begin();
  for (; a != params_.end(); ++a, ++b) {
    if (a->first != b->first || !a->second.bit_equal(b->second)) return false;
  }
  return true;
}

BoundParams::BoundParams(Tape& tape, const ParamSet& params, bool trainable) : trainable_(trainable) {
  for (const auto& [name, t] : params) {
    Tensor v = t;
    vars_.emplace(name, tape.leaf(v.set_grad_enabled(trainable)));
  }
}

const Var& BoundParams::operator[](std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw Error("parameter '" + std::string(name) + "' is not bound");
  return it->second;
}

ParamSet BoundParams::gradients(const Gradients& grads) const {
  ParamSet out;
  for (const auto& [name, v] : vars_) {
    if (const Tensor* g = grads.find(v)) out.set(name, *g);
  }
  return out;
}

Tensor normal_init(const Shape& shape, double std, RngStream& rng) {
  Tensor t = sample_gaussian(shape, rng);
  return scale(t, std);
}

}  // namespace diva
