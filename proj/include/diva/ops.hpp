// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "diva/tensor.hpp"

// Forward-only kernels on plain tensors. The differentiable counterparts in
// autodiff.hpp compute their forward values through these.
namespace diva {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

/// a[m x k] * b[k x n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// a[m x k] * b[n x k]^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Normalizes the last axis to zero mean / unit (biased) variance, then
/// applies `gain` and `bias`, both of last-axis length.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& x);

double sum(const Tensor& a);
double mean(const Tensor& a);

/// Mean squared error over all elements.
double mse(const Tensor& a, const Tensor& b);

/// Unit L2 norm copy of `a`; throws RangeError for a zero vector.
Tensor l2_normalize(const Tensor& a);

double dot(const Tensor& a, const Tensor& b);

/// Cosine similarity of two equal-size tensors viewed as flat vectors.
double cosine(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace diva
