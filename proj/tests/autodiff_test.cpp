// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "diva/autodiff.hpp"
#include "diva/error.hpp"
#include "diva/gradcheck.hpp"
#include "diva/gradsuite.hpp"
#include "diva/ops.hpp"
#include "diva/rng.hpp"

namespace diva {
namespace {

Tensor tracked(Tensor t) { return t.set_grad_enabled(true); }

TEST(Autodiff, SquareAtThree) {
  Tape tape;
  Var x = tape.leaf(tracked(Tensor::scalar(3.0)));
  Var y = mul(x, x);
  Gradients g = backward(y);
  EXPECT_EQ(g[x].item(), 6.0);
}

TEST(Autodiff, SharedSubexpressionAccumulates) {
  // y = x*x + x, so dy/dx = 2x + 1.
  Tape tape;
  Var x = tape.leaf(tracked(Tensor::vector({-1.5, 2.0})));
  Var y = sum(add(mul(x, x), x));
  Gradients g = backward(y);
  EXPECT_EQ(g[x][0], -2.0);
  EXPECT_EQ(g[x][1], 5.0);
}

TEST(Autodiff, EachOpBackwardRunsOnce) {
  Tape tape;
  Var x = tape.leaf(tracked(Tensor::scalar(2.0)));
  int calls = 0;
  Var y = tape.record(Tensor::scalar(4.0), {x}, [&calls, x](std::span<const double> g, Tape& t) {
    ++calls;
    t.grad_of(x)[0] += 4.0 * g[0];
  });
  // Three consumers of y.
  Var z = sum(add(add(y, y), scale(y, 3.0)));
  Gradients g = backward(z);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(g[x].item(), 20.0);
}

TEST(Autodiff, FrozenLeafGetsNoGradient) {
  Tape tape;
  Var w = tape.leaf(Tensor::vector({1.0, 2.0}));
  Var x = tape.leaf(tracked(Tensor::vector({3.0, 4.0})));
  Gradients g = backward(sum(mul(w, x)));
  EXPECT_FALSE(g.contains(w));
  EXPECT_FALSE(w.tracked());
  EXPECT_THROW(g[w], TapeError);
  EXPECT_EQ(g[x][0], 1.0);
  EXPECT_EQ(g[x][1], 2.0);
}

TEST(Autodiff, UnreachableLeafGetsZeros) {
  Tape tape;
  Var unused = tape.leaf(tracked(Tensor::vector({1.0, 2.0, 3.0})));
  Var x = tape.leaf(tracked(Tensor::scalar(1.0)));
  Gradients g = backward(scale(x, 2.0));
  ASSERT_TRUE(g.contains(unused));
  for (double v : g[unused].data()) EXPECT_EQ(v, 0.0);
}

TEST(Autodiff, NonScalarLossRejected) {
  Tape tape;
  Var x = tape.leaf(tracked(Tensor::vector({1.0, 2.0})));
  EXPECT_THROW(backward(mul(x, x)), TapeError);
}

TEST(Autodiff, DetachedLossRejected) {
  Tape tape;
  Var c = tape.constant(Tensor::scalar(1.0));
  EXPECT_THROW(backward(scale(c, 2.0)), TapeError);
}

TEST(Autodiff, ConstantsRecordNoBackwardRule) {
  Tape tape;
  Var a = tape.constant(Tensor::vector({1, 2}));
  Var b = add(a, a);
  EXPECT_FALSE(b.tracked());
  EXPECT_EQ(tape.recorded_ops(), 0u);
}

TEST(Autodiff, LinearLayerGradientsMatchHandDerivation) {
  // L = sum(x W + b) gives dL/dW[i][j] = sum_rows x[r][i], dL/db = rows.
  Tape tape;
  Var x = tape.constant(Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  Var w = tape.leaf(tracked(Tensor::from_rows({{0.5, -1}, {2, 0}})));
  Var b = tape.leaf(tracked(Tensor::vector({0.1, 0.2})));
  Gradients g = backward(sum(add_row(matmul(x, w), b)));
  EXPECT_EQ(g[w][0], 9.0);
  EXPECT_EQ(g[w][1], 9.0);
  EXPECT_EQ(g[w][2], 12.0);
  EXPECT_EQ(g[w][3], 12.0);
  EXPECT_EQ(g[b][0], 3.0);
  EXPECT_EQ(g[b][1], 3.0);
}

TEST(Autodiff, ProductGradientIsOtherFactor) {
  Tape tape;
  Tensor bv = Tensor::from_rows({{0.5, -2}, {3, 7}});
  Var a = tape.leaf(tracked(Tensor::from_rows({{1, 2}, {3, 4}})));
  Var b = tape.constant(bv);
  Gradients g = backward(sum(mul(a, b)));
  EXPECT_TRUE(g[a].bit_equal(bv));
}

TEST(GradCheck, QuadraticFormAgreesWithFiniteDifferences) {
  RngStream rng(21, 0);
  const Tensor A = sample_gaussian({5, 4}, rng);
  const Tensor x = sample_gaussian({4, 1}, rng);
  ScalarFn f = [&](Tape& tape, const Var& v) { return sum_squares(matmul(tape.constant(A), v)); };
  GradCheckResult r = finite_diff_check(f, x);
  EXPECT_EQ(r.checked, 4u);
  EXPECT_LT(r.max_rel_error, 1e-6);

  Tape tape;
  Var v = tape.leaf(tracked(x));
  Gradients g = backward(f(tape, v));
  Tensor want = scale(matmul(transpose(A), matmul(A, x)), 2.0);
  EXPECT_LT(max_abs_diff(g[v], want), 1e-12);
}

TEST(GradCheck, RelativeErrorDefinition) {
  EXPECT_EQ(relative_error(1.0, 1.0, 1e-8), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0, 1e-8), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-12, 1e-8), 1e-4);
}

TEST(GradCheck, SquareAtThreeAgrees) {
  ScalarFn f = [](Tape&, const Var& x) { return mul(x, x); };
  GradCheckResult r = finite_diff_check(f, Tensor::scalar(3.0));
  EXPECT_LT(r.max_rel_error, 1e-9);
  EXPECT_EQ(r.checked, 1u);
}

TEST(GradCheck, DetectsCorruptedBackwardRule) {
  // Forward x^3 but backward claims 2x.
  ScalarFn f = [](Tape& tape, const Var& x) {
    double v = x.value().item();
    return tape.record(Tensor::scalar(v * v * v), {x},
                       [x, v](std::span<const double> g, Tape& t) { t.grad_of(x)[0] += 2.0 * v * g[0]; });
  };
  GradCheckResult r = finite_diff_check(f, Tensor::scalar(1.5));
  EXPECT_GT(r.max_rel_error, 0.1);
  EXPECT_NEAR(r.numeric, 3 * 1.5 * 1.5, 1e-6);
}

TEST(GradCheck, RestrictsToRequestedIndices) {
  ScalarFn f = [](Tape&, const Var& x) { return sum_squares(x); };
  std::vector<std::size_t> idx = {1, 3};
  GradCheckResult r = finite_diff_check(f, Tensor::vector({1, 2, 3, 4}), 1e-5, idx);
  EXPECT_EQ(r.checked, 2u);
  EXPECT_LT(r.max_rel_error, 1e-9);
  std::vector<std::size_t> bad = {4};
  EXPECT_THROW(finite_diff_check(f, Tensor::vector({1, 2, 3, 4}), 1e-5, bad), RangeError);
}

TEST(GradCheck, EveryPrimitiveAgreesWithFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto suite = primitive_gradcheck_suite(seed);
    EXPECT_GE(suite.size(), 25u);
    for (const auto& c : suite) {
      EXPECT_LT(c.result.max_rel_error, 1e-6)
          << c.name << " seed " << seed << " analytic " << c.result.analytic << " numeric " << c.result.numeric;
      EXPECT_GT(c.result.checked, 0u);
    }
  }
}

TEST(GradCheck, EndToEndPhaseBLossOnTinyModel) {
  GradCheckResult r = end_to_end_gradcheck(64, 11);
  EXPECT_EQ(r.checked, 64u);
  EXPECT_LT(r.max_rel_error, 1e-4) << "analytic " << r.analytic << " numeric " << r.numeric;
}

}  // namespace
}  // namespace diva
