// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace diva {

using Shape = std::vector<std::size_t>;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

/// Tensor storage, aligned to Eigen's widest packet. Vectorized reductions
/// then take the same path for every buffer of a given shape.
using Storage = std::vector<double, Eigen::aligned_allocator<double>>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// Storage is shared and immutable: copying a Tensor is cheap and never
/// aliases mutable state. `mutable_data()` detaches before returning a
/// writable view, so values handed to other owners are never changed
/// behind their back.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, bool grad_enabled = false);
  Tensor(Shape shape, std::vector<double> data, bool grad_enabled = false);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor from_matrix(const RowMatrix& m);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_->size(); }
  std::size_t dim(std::size_t axis) const;

  /// Row/column view used by matrix kernels: rank 0 and 1 tensors are a
  /// single row, higher ranks fold every leading axis into rows.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return {data_->data(), data_->size()}; }
  std::span<double> mutable_data();
  double operator[](std::size_t i) const { return (*data_)[i]; }
  double item() const;

  ConstMatrixMap matrix() const { return {data_->data(), Eigen::Index(rows()), Eigen::Index(cols())}; }
  ConstVectorMap flat() const { return {data_->data(), Eigen::Index(size())}; }

  bool grad_enabled() const { return grad_enabled_; }
  Tensor& set_grad_enabled(bool enabled) {
    grad_enabled_ = enabled;
    return *this;
  }

  Tensor reshaped(Shape shape) const;

  /// True when shapes match and every element is bitwise identical.
  bool bit_equal(const Tensor& other) const;

 private:
  Shape shape_;
  std::shared_ptr<const Storage> data_;
  bool grad_enabled_ = false;
};

bool all_finite(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace diva
