// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "diva/tensor.hpp"

namespace diva {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid for the
/// lifetime of its tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  /// True when the value depends on at least one grad-enabled leaf.
  bool tracked() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of a scalar loss with respect to grad-enabled leaves.
class Gradients {
 public:
  bool contains(const Var& leaf) const { return grads_.count(leaf.id()) != 0; }
  /// Throws TapeError when `leaf` received no gradient.
  const Tensor& operator[](const Var& leaf) const;
  const Tensor* find(const Var& leaf) const;
  std::size_t size() const { return grads_.size(); }

 private:
  friend class Tape;
  std::unordered_map<std::size_t, Tensor> grads_;
};

/// Linear record of executed operations. Nodes are appended in execution
/// order, which is a topological order, so backward walks the record once
/// from the end.
///
/// A tape and its forward pass belong to one thread.
class Tape {
 public:
  /// Accumulates vector-Jacobian products into the inputs' gradient buffers.
  using BackwardFn = std::function<void(std::span<const double> grad_out, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf participates in differentiation iff `value.grad_enabled()`.
  Var leaf(Tensor value);
  Var constant(Tensor value);

  /// Registers an operation result. When no input is tracked the result is
  /// stored as a constant and `backward_fn` is dropped.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward_fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward_fn);

  /// Gradient buffer of `v`, zero-initialized on first access. Only valid
  /// for tracked vars while backward() runs.
  std::span<double> grad_of(const Var& v);

  Gradients backward(const Var& loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool tracked(std::size_t id) const { return nodes_[id].tracked; }
  std::size_t size() const { return nodes_.size(); }
  /// Number of nodes holding a backward rule.
  std::size_t recorded_ops() const { return recorded_ops_; }

 private:
  struct Node {
    Tensor value;
    bool tracked = false;
    bool leaf = false;
    BackwardFn backward;
    Storage grad;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
  std::size_t recorded_ops_ = 0;
};

Gradients backward(const Var& loss);

// Differentiable operations. Shapes follow the forward kernels in ops.hpp.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// a[m x n] + b broadcast over rows; b holds n values.
Var add_row(const Var& a, const Var& b);
Var matmul(const Var& a, const Var& b);
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);
Var softmax(const Var& x, std::size_t axis);
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps);
Var gelu(const Var& x);
Var reshape(const Var& a, Shape shape);

Var slice_rows(const Var& a, std::size_t begin, std::size_t count);
Var slice_cols(const Var& a, std::size_t begin, std::size_t count);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
/// Column means, [m x n] -> [1 x n].
Var mean_rows(const Var& a);
/// out.flat[i] = a.flat[index[i]]; `index` may repeat or drop entries.
Var gather(const Var& a, std::span<const std::size_t> index, Shape shape);

Var sum(const Var& a);
Var mean(const Var& a);
Var sum_squares(const Var& a);
Var mse(const Var& a, const Var& b);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, double s) { return scale(a, s); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

}  // namespace diva
