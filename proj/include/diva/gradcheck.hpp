// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "diva/autodiff.hpp"

namespace diva {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, abs_floor). The floor
/// keeps entries whose true gradient is zero from dividing roundoff by
/// roundoff.
double relative_error(double analytic, double numeric, double abs_floor);

using ScalarFn = std::function<Var(Tape&, const Var&)>;

/// Compares the tape gradient of `f` at `x` with central differences of
/// step `h`, elementwise. When `indices` is non-empty only those entries are
/// perturbed.
GradCheckResult finite_diff_check(const ScalarFn& f, const Tensor& x, double h = 1e-5,
                                  std::span<const std::size_t> indices = {}, double abs_floor = 1e-8);

/// Central difference of a plain scalar function along one coordinate.
double central_difference(const std::function<double(double)>& f, double x, double h);

}  // namespace diva
