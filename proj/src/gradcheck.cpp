// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "diva/error.hpp"

namespace diva {

double relative_error(double analytic, double numeric, double abs_floor) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
  return std::abs(analytic - numeric) / denom;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  if (!(h > 0.0)) throw RangeError("central_difference: step must be positive");
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

GradCheckResult finite_diff_check(const ScalarFn& f, const Tensor& x, double h,
                                  std::span<const std::size_t> indices, double abs_floor) {
  if (!(h > 0.0)) throw RangeError("finite_diff_check: step must be positive");

  Tensor analytic;
  {
    Tape tape;
    Tensor leaf = x;
    Var xv = tape.leaf(leaf.set_grad_enabled(true));
    Var loss = f(tape, xv);
    // A function that ignores its input has an identically zero gradient.
    analytic = loss.tracked() ? tape.backward(loss)[xv] : Tensor(x.shape());
  }

  auto eval = [&](const Tensor& point) {
    Tape tape;
    return f(tape, tape.constant(point)).value().item();
  };

  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(x.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    indices = all;
  }

  GradCheckResult result;
  for (auto i : indices) {
    if (i >= x.size()) throw RangeError("finite_diff_check: index out of range");
    Tensor plus = x;
    Tensor minus = x;
    plus.mutable_data()[i] += h;
    minus.mutable_data()[i] -= h;
    double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
    double err = relative_error(analytic[i], numeric, abs_floor);
    if (result.checked == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.analytic = analytic[i];
      result.numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace diva
