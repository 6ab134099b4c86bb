// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/autodiff.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "diva/error.hpp"
#include "diva/ops.hpp"

namespace diva {

const Tensor& Var::value() const {
  if (!tape_) throw TapeError("use of an unbound Var");
  return tape_->value(id_);
}

bool Var::tracked() const { return tape_ && tape_->tracked(id_); }

const Tensor& Gradients::operator[](const Var& leaf) const {
  auto it = grads_.find(leaf.id());
  if (it == grads_.end()) throw TapeError("no gradient recorded for node " + std::to_string(leaf.id()));
  return it->second;
}

const Tensor* Gradients::find(const Var& leaf) const {
  auto it = grads_.find(leaf.id());
  return it == grads_.end() ? nullptr : &it->second;
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.tracked = value.grad_enabled();
  n.leaf = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(Tensor value) {
  value.set_grad_enabled(false);
  return leaf(std::move(value));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward_fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward_fn));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward_fn) {
  bool any = false;
  for (const auto& v : inputs) {
    if (&v.tape() != this) throw TapeError("operation mixes vars from different tapes");
    any = any || v.tracked();
  }
  value.set_grad_enabled(false);
  Node n;
  n.value = std::move(value);
  n.tracked = any;
  if (any) {
    n.backward = std::move(backward_fn);
    ++recorded_ops_;
  }
  return push(std::move(n));
}

std::span<double> Tape::grad_of(const Var& v) {
  auto& n = nodes_[v.id()];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return {n.grad.data(), n.grad.size()};
}

Gradients Tape::backward(const Var& loss) {
  if (&loss.tape() != this) throw TapeError("loss belongs to a different tape");
  if (loss.value().size() != 1) {
    throw TapeError("backward requires a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.tracked()) throw TapeError("loss is detached: it depends on no grad-enabled leaf");

  for (auto& n : nodes_) n.grad.clear();
  grad_of(loss)[0] = 1.0;

  Gradients out;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.tracked || n.grad.empty()) continue;
    if (n.leaf) {
      out.grads_.emplace(i, Tensor(n.value.shape(), std::vector<double>(n.grad.begin(), n.grad.end())));
      n.grad.clear();
      continue;
    }
    n.backward(std::span<const double>(n.grad.data(), n.grad.size()), *this);
    n.grad.clear();
    n.grad.shrink_to_fit();
  }
  // Leaves that are grad-enabled but unreachable from the loss get zeros.
  for (std::size_t i = 0; i <= loss.id(); ++i) {
    const auto& n = nodes_[i];
    if (n.leaf && n.tracked && !out.grads_.count(i)) out.grads_.emplace(i, Tensor(n.value.shape()));
  }
  return out;
}

Gradients backward(const Var& loss) { return loss.tape().backward(loss); }

namespace {

ConstMatrixMap as_matrix(std::span<const double> g, std::size_t rows, std::size_t cols) {
  return {g.data(), Eigen::Index(rows), Eigen::Index(cols)};
}

MatrixMap as_matrix(std::span<double> g, std::size_t rows, std::size_t cols) {
  return {g.data(), Eigen::Index(rows), Eigen::Index(cols)};
}

ConstVectorMap as_vector(std::span<const double> g) { return {g.data(), Eigen::Index(g.size())}; }
VectorMap as_vector(std::span<double> g) { return {g.data(), Eigen::Index(g.size())}; }

void require_matrix(const Var& v, const char* what) {
  if (v.value().rank() != 2) {
    throw ShapeError(std::string(what) + " expects a rank-2 tensor, got " + shape_string(v.shape()));
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return a.tape().record(add(a.value(), b.value()), {a, b}, [a, b](std::span<const double> g, Tape& t) {
    if (a.tracked()) as_vector(t.grad_of(a)) += as_vector(g);
    if (b.tracked()) as_vector(t.grad_of(b)) += as_vector(g);
  });
}

Var sub(const Var& a, const Var& b) {
  return a.tape().record(sub(a.value(), b.value()), {a, b}, [a, b](std::span<const double> g, Tape& t) {
    if (a.tracked()) as_vector(t.grad_of(a)) += as_vector(g);
    if (b.tracked()) as_vector(t.grad_of(b)) -= as_vector(g);
  });
}

Var mul(const Var& a, const Var& b) {
  return a.tape().record(mul(a.value(), b.value()), {a, b}, [a, b](std::span<const double> g, Tape& t) {
    if (a.tracked()) as_vector(t.grad_of(a)).array() += as_vector(g).array() * b.value().flat().array();
    if (b.tracked()) as_vector(t.grad_of(b)).array() += as_vector(g).array() * a.value().flat().array();
  });
}

Var scale(const Var& a, double s) {
  return a.tape().record(scale(a.value(), s), {a}, [a, s](std::span<const double> g, Tape& t) {
    as_vector(t.grad_of(a)) += s * as_vector(g);
  });
}

Var add_row(const Var& a, const Var& b) {
  require_matrix(a, "add_row");
  std::size_t m = a.value().dim(0);
  std::size_t n = a.value().dim(1);
  if (b.value().size() != n) {
    throw ShapeError("add_row: row " + shape_string(b.shape()) + " does not match columns of " +
                     shape_string(a.shape()));
  }
  RowMatrix out = a.value().matrix();
  out.rowwise() += b.value().flat().transpose();
  return a.tape().record(Tensor::from_matrix(out), {a, b}, [a, b, m, n](std::span<const double> g, Tape& t) {
    auto gm = as_matrix(g, m, n);
    if (a.tracked()) as_vector(t.grad_of(a)) += as_vector(g);
    if (b.tracked()) as_vector(t.grad_of(b)) += gm.colwise().sum().transpose();
  });
}

Var matmul(const Var& a, const Var& b) {
  Tensor out = matmul(a.value(), b.value());
  std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
  return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g, Tape& t) {
    auto gm = as_matrix(g, m, n);
    if (a.tracked()) as_matrix(t.grad_of(a), m, k).noalias() += gm * b.value().matrix().transpose();
    if (b.tracked()) as_matrix(t.grad_of(b), k, n).noalias() += a.value().matrix().transpose() * gm;
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  Tensor out = matmul_nt(a.value(), b.value());
  std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(0);
  return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g, Tape& t) {
    auto gm = as_matrix(g, m, n);
    if (a.tracked()) as_matrix(t.grad_of(a), m, k).noalias() += gm * b.value().matrix();
    if (b.tracked()) as_matrix(t.grad_of(b), n, k).noalias() += gm.transpose() * a.value().matrix();
  });
}

Var transpose(const Var& a) {
  Tensor out = transpose(a.value());
  std::size_t m = a.value().dim(0), n = a.value().dim(1);
  return a.tape().record(std::move(out), {a}, [a, m, n](std::span<const double> g, Tape& t) {
    as_matrix(t.grad_of(a), m, n) += as_matrix(g, n, m).transpose();
  });
}

Var softmax(const Var& x, std::size_t axis) {
  Tensor y = softmax(x.value(), axis);
  const auto& s = x.shape();
  std::size_t n = s[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  std::size_t outer = x.value().size() / (n * inner);
  return x.tape().record(y, {x}, [x, y, n, inner, outer](std::span<const double> g, Tape& t) {
    auto gx = t.grad_of(x);
    auto yv = y.data();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t j = 0; j < inner; ++j) {
        std::size_t base = o * n * inner + j;
        double d = 0.0;
        for (std::size_t k = 0; k < n; ++k) d += g[base + k * inner] * yv[base + k * inner];
        for (std::size_t k = 0; k < n; ++k) {
          std::size_t idx = base + k * inner;
          gx[idx] += yv[idx] * (g[idx] - d);
        }
      }
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  Tensor y = layer_norm(x.value(), gain.value(), bias.value(), eps);
  std::size_t n = x.value().cols();
  std::size_t rows = x.value().rows();
  return x.tape().record(std::move(y), {x, gain, bias},
                         [x, gain, bias, eps, n, rows](std::span<const double> g, Tape& t) {
    auto in = x.value().matrix();
    auto gm = as_matrix(g, rows, n);
    Eigen::RowVectorXd gv = gain.value().flat().transpose();
    Eigen::RowVectorXd dgain = Eigen::RowVectorXd::Zero(Eigen::Index(n));
    for (Eigen::Index r = 0; r < Eigen::Index(rows); ++r) {
      double mu = in.row(r).mean();
      double var = (in.row(r).array() - mu).square().mean();
      double rstd = 1.0 / std::sqrt(var + eps);
      Eigen::RowVectorXd xhat = (in.row(r).array() - mu) * rstd;
      if (gain.tracked()) dgain.array() += gm.row(r).array() * xhat.array();
      if (x.tracked()) {
        Eigen::RowVectorXd dxhat = gm.row(r).array() * gv.array();
        double m1 = dxhat.mean();
        double m2 = dxhat.dot(xhat) / double(n);
        as_matrix(t.grad_of(x), rows, n).row(r).array() += rstd * (dxhat.array() - m1 - xhat.array() * m2);
      }
    }
    if (gain.tracked()) as_vector(t.grad_of(gain)) += dgain.transpose();
    if (bias.tracked()) as_vector(t.grad_of(bias)) += gm.colwise().sum().transpose();
  });
}

Var gelu(const Var& x) {
  return x.tape().record(gelu(x.value()), {x}, [x](std::span<const double> g, Tape& t) {
    auto gx = t.grad_of(x);
    auto in = x.value().data();
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double v = in[i];
      double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
      double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      gx[i] += g[i] * (cdf + v * pdf);
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  return a.tape().record(a.value().reshaped(std::move(shape)), {a}, [a](std::span<const double> g, Tape& t) {
    as_vector(t.grad_of(a)) += as_vector(g);
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t count) {
  require_matrix(a, "slice_rows");
  std::size_t m = a.value().dim(0), n = a.value().dim(1);
  if (count == 0 || begin + count > m) {
    throw RangeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + shape_string(a.shape()));
  }
  auto src = a.value().data().subspan(begin * n, count * n);
  Tensor out({count, n}, std::vector<double>(src.begin(), src.end()));
  return a.tape().record(std::move(out), {a}, [a, begin, count, n](std::span<const double> g, Tape& t) {
    auto ga = t.grad_of(a).subspan(begin * n, count * n);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t count) {
  require_matrix(a, "slice_cols");
  std::size_t m = a.value().dim(0), n = a.value().dim(1);
  if (count == 0 || begin + count > n) {
    throw RangeError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + shape_string(a.shape()));
  }
  RowMatrix out = a.value().matrix().middleCols(Eigen::Index(begin), Eigen::Index(count));
  return a.tape().record(Tensor::from_matrix(out), {a}, [a, begin, count, m, n](std::span<const double> g, Tape& t) {
    as_matrix(t.grad_of(a), m, n).middleCols(Eigen::Index(begin), Eigen::Index(count)) += as_matrix(g, m, count);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  std::size_t n = parts[0].value().cols();
  std::size_t m = 0;
  std::vector<double> data;
  for (const auto& p : parts) {
    require_matrix(p, "concat_rows");
    if (p.value().cols() != n) {
      throw ShapeError("concat_rows: column mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    m += p.value().rows();
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(Tensor({m, n}, std::move(data)), parts,
                                [inputs](std::span<const double> g, Tape& t) {
    std::size_t offset = 0;
    for (const auto& p : inputs) {
      std::size_t len = p.value().size();
      if (p.tracked()) as_vector(t.grad_of(p)) += as_vector(g.subspan(offset, len));
      offset += len;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  std::size_t m = parts[0].value().rows();
  std::size_t n = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_cols");
    if (p.value().rows() != m) {
      throw ShapeError("concat_cols: row mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    n += p.value().cols();
  }
  RowMatrix out(m, n);
  std::size_t c = 0;
  for (const auto& p : parts) {
    out.middleCols(Eigen::Index(c), Eigen::Index(p.value().cols())) = p.value().matrix();
    c += p.value().cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(Tensor::from_matrix(out), parts, [inputs, m, n](std::span<const double> g, Tape& t) {
    auto gm = as_matrix(g, m, n);
    std::size_t c = 0;
    for (const auto& p : inputs) {
      std::size_t w = p.value().cols();
      if (p.tracked()) as_matrix(t.grad_of(p), m, w) += gm.middleCols(Eigen::Index(c), Eigen::Index(w));
      c += w;
    }
  });
}

Var mean_rows(const Var& a) {
  require_matrix(a, "mean_rows");
  std::size_t m = a.value().dim(0), n = a.value().dim(1);
  RowMatrix out = a.value().matrix().colwise().mean();
  return a.tape().record(Tensor::from_matrix(out), {a}, [a, m, n](std::span<const double> g, Tape& t) {
    Eigen::RowVectorXd row = as_vector(g).transpose() / double(m);
    as_matrix(t.grad_of(a), m, n).rowwise() += row;
  });
}

Var gather(const Var& a, std::span<const std::size_t> index, Shape shape) {
  if (shape_size(shape) != index.size()) {
    throw ShapeError("gather: index length " + std::to_string(index.size()) + " does not match shape " +
                     shape_string(shape));
  }
  auto src = a.value().data();
  std::vector<double> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= src.size()) throw RangeError("gather: index out of range");
    out[i] = src[index[i]];
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return a.tape().record(Tensor(std::move(shape), std::move(out)), {a},
                         [a, idx = std::move(idx)](std::span<const double> g, Tape& t) {
    auto ga = t.grad_of(a);
    for (std::size_t i = 0; i < idx.size(); ++i) ga[idx[i]] += g[i];
  });
}

Var sum(const Var& a) {
  return a.tape().record(Tensor::scalar(sum(a.value())), {a}, [a](std::span<const double> g, Tape& t) {
    as_vector(t.grad_of(a)).array() += g[0];
  });
}

Var mean(const Var& a) {
  double n = double(a.value().size());
  return a.tape().record(Tensor::scalar(mean(a.value())), {a}, [a, n](std::span<const double> g, Tape& t) {
    as_vector(t.grad_of(a)).array() += g[0] / n;
  });
}

Var sum_squares(const Var& a) {
  return a.tape().record(Tensor::scalar(a.value().flat().squaredNorm()), {a},
                         [a](std::span<const double> g, Tape& t) {
    as_vector(t.grad_of(a)) += 2.0 * g[0] * a.value().flat();
  });
}

Var mse(const Var& a, const Var& b) {
  double value = mse(a.value(), b.value());
  double n = double(a.value().size());
  return a.tape().record(Tensor::scalar(value), {a, b}, [a, b, n](std::span<const double> g, Tape& t) {
    Eigen::VectorXd d = (2.0 * g[0] / n) * (a.value().flat() - b.value().flat());
    if (a.tracked()) as_vector(t.grad_of(a)) += d;
    if (b.tracked()) as_vector(t.grad_of(b)) -= d;
  });
}

}  // namespace diva
