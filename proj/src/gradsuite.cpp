// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/gradsuite.hpp"

#include <array>
#include <cmath>

#include "diva/synthbench.hpp"
#include "diva/trainer.hpp"

namespace diva {

namespace {

// Random weights for the projection sum(W * y) that reduces an op output to
// a scalar.
Var project(Tape& tape, const Var& y, std::uint64_t seed) {
  RngStream rng(seed, 0x9a0);
  Var w = tape.constant(sample_gaussian(y.shape(), rng));
  return sum(mul(y, w));
}

Tensor random_tensor(Shape shape, RngStream& rng, double offset = 0.0) {
  Tensor t = sample_gaussian(std::move(shape), rng);
  for (auto& v : t.mutable_data()) v += offset;
  return t;
}

}  // namespace

std::vector<NamedGradCheck> primitive_gradcheck_suite(std::uint64_t seed) {
  RngStream rng(seed, 0x9a1);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({3, 4}, rng);
  const Tensor c = random_tensor({4, 5}, rng);
  const Tensor d = random_tensor({5, 4}, rng);
  const Tensor row = random_tensor({1, 4}, rng);
  const Tensor gain = random_tensor({4}, rng, 1.0);
  const Tensor bias = random_tensor({4}, rng);
  const Tensor cube = random_tensor({2, 3, 4}, rng);
  const std::array<std::size_t, 6> index = {5, 0, 11, 5, 7, 2};

  // Entries smaller than this are compared absolutely: their central
  // differences carry roundoff near 1e-10.
  constexpr double kAbsFloor = 1e-4;
  std::vector<NamedGradCheck> out;
  auto check = [&](std::string name, const Tensor& x, auto body) {
    ScalarFn f = [&, body](Tape& tape, const Var& v) { return project(tape, body(tape, v), seed); };
    out.push_back({std::move(name), finite_diff_check(f, x, 1e-5, {}, kAbsFloor)});
  };
  auto scalar_check = [&](std::string name, const Tensor& x, auto body) {
    ScalarFn f = [body](Tape& tape, const Var& v) { return body(tape, v); };
    out.push_back({std::move(name), finite_diff_check(f, x, 1e-5, {}, kAbsFloor)});
  };

  check("add", a, [&](Tape& t, const Var& x) { return add(x, t.constant(b)); });
  check("sub.lhs", a, [&](Tape& t, const Var& x) { return sub(x, t.constant(b)); });
  check("sub.rhs", b, [&](Tape& t, const Var& x) { return sub(t.constant(a), x); });
  check("mul", a, [&](Tape& t, const Var& x) { return mul(x, t.constant(b)); });
  check("mul.self", a, [&](Tape&, const Var& x) { return mul(x, x); });
  check("scale", a, [&](Tape&, const Var& x) { return scale(x, -1.7); });
  check("add_row.lhs", a, [&](Tape& t, const Var& x) { return add_row(x, t.constant(row)); });
  check("add_row.rhs", row, [&](Tape& t, const Var& x) { return add_row(t.constant(a), x); });
  check("matmul.lhs", a, [&](Tape& t, const Var& x) { return matmul(x, t.constant(c)); });
  check("matmul.rhs", c, [&](Tape& t, const Var& x) { return matmul(t.constant(a), x); });
  check("matmul_nt.lhs", a, [&](Tape& t, const Var& x) { return matmul_nt(x, t.constant(d)); });
  check("matmul_nt.rhs", d, [&](Tape& t, const Var& x) { return matmul_nt(t.constant(a), x); });
  check("transpose", a, [&](Tape&, const Var& x) { return transpose(x); });
  check("softmax.rows", a, [&](Tape&, const Var& x) { return softmax(x, 1); });
  check("softmax.cols", a, [&](Tape&, const Var& x) { return softmax(x, 0); });
  check("softmax.rank3", cube, [&](Tape&, const Var& x) { return softmax(x, 1); });
  check("layer_norm.x", a, [&](Tape& t, const Var& x) {
    return layer_norm(x, t.constant(gain), t.constant(bias), 1e-5);
  });
  check("layer_norm.gain", gain, [&](Tape& t, const Var& g) {
    return layer_norm(t.constant(a), g, t.constant(bias), 1e-5);
  });
  check("layer_norm.bias", bias, [&](Tape& t, const Var& bb) {
    return layer_norm(t.constant(a), t.constant(gain), bb, 1e-5);
  });
  check("gelu", a, [&](Tape&, const Var& x) { return gelu(x); });
  check("reshape", a, [&](Tape&, const Var& x) { return reshape(x, {2, 6}); });
  check("slice_rows", a, [&](Tape&, const Var& x) { return slice_rows(x, 1, 2); });
  check("slice_cols", a, [&](Tape&, const Var& x) { return slice_cols(x, 1, 2); });
  check("concat_rows", a, [&](Tape& t, const Var& x) {
    std::array<Var, 3> parts = {x, t.constant(b), x};
    return concat_rows(parts);
  });
  check("concat_cols", a, [&](Tape& t, const Var& x) {
    std::array<Var, 3> parts = {t.constant(b), x, x};
    return concat_cols(parts);
  });
  check("mean_rows", a, [&](Tape&, const Var& x) { return mean_rows(x); });
  check("gather", a, [&](Tape&, const Var& x) { return gather(x, index, {2, 3}); });
  scalar_check("sum", a, [](Tape&, const Var& x) { return sum(x); });
  scalar_check("mean", a, [](Tape&, const Var& x) { return mean(x); });
  scalar_check("sum_squares", a, [](Tape&, const Var& x) { return sum_squares(x); });
  scalar_check("mse.lhs", a, [&](Tape& t, const Var& x) { return mse(x, t.constant(b)); });
  scalar_check("mse.rhs", b, [&](Tape& t, const Var& x) { return mse(t.constant(a), x); });
  return out;
}

EncoderConfig tiny_encoder_config() {
  EncoderConfig c;
  c.image_size = 8;
  c.patch_size = 4;
  c.embed_dim = 8;
  c.depth = 1;
  c.heads = 2;
  return c;
}

DenoiserConfig tiny_denoiser_config() {
  DenoiserConfig c;
  c.image_size = 8;
  c.patch_size = 4;
  c.embed_dim = 8;
  c.depth = 1;
  c.heads = 2;
  c.time_embed_dim = 8;
  c.condition_dim = 8;
  return c;
}

GradCheckResult end_to_end_gradcheck(std::size_t samples, std::uint64_t seed) {
  Model model = Model::init(tiny_encoder_config(), tiny_denoiser_config(), seed);
  RngStream rng(seed, 0x9a2);
  std::vector<Image> images;
  for (int i = 0; i < 2; ++i) {
    Tensor px = sample_gaussian({8, 8, 3}, rng);
    for (auto& v : px.mutable_data()) v = std::tanh(v);
    images.emplace_back(std::move(px));
  }
  NoiseSchedule sched(1000, 1e-4, 0.02);
  return check_phase_b_gradients(model, images, sched, RecapStrategy::random_subset(0.5), 2, samples, seed);
}

}  // namespace diva
