// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/ops.hpp"

#include <cmath>
#include <string>

#include "diva/error.hpp"

namespace diva {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

namespace {

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* what, F f) {
  require_same_shape(a, b, what);
  std::vector<double> out(a.size());
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
  return Tensor(a.shape(), std::move(out));
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(what) + " expects a rank-2 tensor, got " + shape_string(t.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= s;
  return Tensor(a.shape(), std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner dimensions disagree for " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
  RowMatrix out = a.matrix() * b.matrix();
  return Tensor::from_matrix(out);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.dim(1) != b.dim(1)) {
    throw ShapeError("matmul_nt: inner dimensions disagree for " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + "^T");
  }
  RowMatrix out = a.matrix() * b.matrix().transpose();
  return Tensor::from_matrix(out);
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  RowMatrix out = a.matrix().transpose();
  return Tensor::from_matrix(out);
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw RangeError("softmax: axis " + std::to_string(axis) + " invalid for shape " + shape_string(x.shape()));
  }
  const auto& s = x.shape();
  std::size_t n = s[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  std::size_t outer = x.size() / (n * inner);

  std::vector<double> out(x.size());
  auto in = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) {
      std::size_t base = o * n * inner + j;
      double mx = in[base];
      for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, in[base + k * inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double e = std::exp(in[base + k * inner] - mx);
        out[base + k * inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < n; ++k) out[base + k * inner] /= total;
    }
  }
  return Tensor(s, std::move(out));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (eps <= 0.0) throw RangeError("layer_norm: eps must be positive");
  std::size_t n = x.cols();
  if (gain.size() != n || bias.size() != n) {
    throw ShapeError("layer_norm: gain " + shape_string(gain.shape()) + " / bias " + shape_string(bias.shape()) +
                     " do not match last axis of " + shape_string(x.shape()));
  }
  RowMatrix out(x.rows(), n);
  auto in = x.matrix();
  ConstVectorMap g = gain.flat();
  ConstVectorMap b = bias.flat();
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    double mu = in.row(r).mean();
    double var = (in.row(r).array() - mu).square().mean();
    double rstd = 1.0 / std::sqrt(var + eps);
    out.row(r) = ((in.row(r).array() - mu) * rstd * g.transpose().array() + b.transpose().array()).matrix();
  }
  return Tensor(x.shape(), std::vector<double>(out.data(), out.data() + out.size()));
}

Tensor gelu(const Tensor& x) {
  std::vector<double> out(x.size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * in[i] * (1.0 + std::erf(in[i] * M_SQRT1_2));
  return Tensor(x.shape(), std::move(out));
}

double sum(const Tensor& a) { return a.flat().sum(); }

double mean(const Tensor& a) { return a.flat().mean(); }

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  return (a.flat() - b.flat()).squaredNorm() / double(a.size());
}

Tensor l2_normalize(const Tensor& a) {
  double norm = a.flat().norm();
  if (!(norm > 0.0)) throw RangeError("l2_normalize: zero vector");
  return scale(a, 1.0 / norm);
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: size mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  return a.flat().dot(b.flat());
}

double cosine(const Tensor& a, const Tensor& b) {
  double na = a.flat().norm();
  double nb = b.flat().norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw RangeError("cosine: zero vector");
  return dot(a, b) / (na * nb);
}

}  // namespace diva
