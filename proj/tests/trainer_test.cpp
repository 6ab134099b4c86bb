// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "diva/error.hpp"
#include "diva/gradsuite.hpp"
#include "diva/synthbench.hpp"
#include "diva/trainer.hpp"
#include "oracle.hpp"

namespace diva {
namespace {

std::vector<Image> tiny_images(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<Image> out;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor px = sample_gaussian({8, 8, 3}, rng);
    for (auto& v : px.mutable_data()) v = std::tanh(v);
    out.emplace_back(std::move(px));
  }
  return out;
}

Model tiny_model(std::uint64_t seed) { return Model::init(tiny_encoder_config(), tiny_denoiser_config(), seed); }

TrainConfig tiny_train(Phase phase, std::size_t steps) {
  TrainConfig c;
  c.phase = phase;
  c.steps = steps;
  c.batch_size = 3;
  c.seed = 5;
  c.learning_rate = phase == Phase::A ? 0.05 : 1e-2;
  return c;
}

const NoiseSchedule& sched() {
  static const NoiseSchedule s(1000, 1e-4, 0.02);
  return s;
}

TEST(Sgd, ZeroGradientLeavesParamsUnchanged) {
  ParamSet p;
  p.set("w", Tensor::vector({1.0, -2.0}));
  ParamSet g;
  g.set("w", Tensor({2}));
  OptimizerState s;
  ParamSet before = p;
  sgd_update(p, g, s, 0.1, 0.9);
  EXPECT_TRUE(p.bit_equal(before));
}

TEST(Sgd, HandIteratedMomentum) {
  ParamSet p;
  p.set("w", Tensor::scalar(1.0));
  ParamSet g;
  g.set("w", Tensor::scalar(2.0));
  OptimizerState s;
  sgd_update(p, g, s, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(s.velocity.at("w").item(), 2.0);
  EXPECT_DOUBLE_EQ(p.at("w").item(), 0.8);
  sgd_update(p, g, s, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(s.velocity.at("w").item(), 3.8);
  EXPECT_DOUBLE_EQ(p.at("w").item(), 0.42);
}

TEST(Sgd, ZeroMomentumIsPlainGradientDescent) {
  ParamSet p;
  p.set("w", Tensor::vector({1.0, 2.0}));
  ParamSet g;
  g.set("w", Tensor::vector({0.5, -1.0}));
  OptimizerState s;
  for (int i = 0; i < 3; ++i) sgd_update(p, g, s, 0.2, 0.0);
  EXPECT_DOUBLE_EQ(p.at("w")[0], 1.0 - 3 * 0.1);
  EXPECT_DOUBLE_EQ(p.at("w")[1], 2.0 + 3 * 0.2);
}

TEST(Sgd, ShapeMismatchRejected) {
  ParamSet p;
  p.set("w", Tensor::vector({1.0, 2.0}));
  ParamSet g;
  g.set("w", Tensor::vector({1.0, 2.0, 3.0}));
  OptimizerState s;
  EXPECT_THROW(sgd_update(p, g, s, 0.1, 0.9), ShapeError);
}

TEST(TrainStep, GradientsCoverOnlyTheTrainedSide) {
  Model m = tiny_model(1);
  auto images = tiny_images(1, 2);
  std::vector<std::uint64_t> keys = {0};
  ParamSet b = train_step({images, keys}, m, sched(), RecapStrategy::all(), Phase::B, 2, 1, 1).gradients;
  EXPECT_EQ(b.size(), m.encoder.size());
  for (const auto& [name, t] : b) EXPECT_TRUE(m.encoder.contains(name)) << name;
  ParamSet a = train_step({images, keys}, m, sched(), RecapStrategy::all(), Phase::A, 2, 1, 1).gradients;
  EXPECT_EQ(a.size(), m.denoiser.size());
  for (const auto& [name, t] : a) EXPECT_TRUE(m.denoiser.contains(name)) << name;
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.states_per_image = 0;
  EXPECT_THROW(c.validate(), RangeError);
  c = TrainConfig{};
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), RangeError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), RangeError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), RangeError);
}

TEST(TrainStep, PhaseBLeavesDenoiserBitIdentical) {
  Model m = tiny_model(2);
  ParamSet before = m.denoiser;
  RunResult r = run_training(tiny_train(Phase::B, 3), m, tiny_images(4, 3));
  EXPECT_TRUE(r.model.denoiser.bit_equal(before));
  EXPECT_FALSE(r.model.encoder.bit_equal(m.encoder));
}

TEST(TrainStep, PhaseALeavesEncoderBitIdentical) {
  Model m = tiny_model(3);
  RunResult r = pretrain_denoiser(tiny_train(Phase::A, 3), m, tiny_images(4, 3));
  EXPECT_TRUE(r.model.encoder.bit_equal(m.encoder));
  EXPECT_FALSE(r.model.denoiser.bit_equal(m.denoiser));
}

TEST(TrainStep, PretrainRequiresPhaseA) {
  EXPECT_THROW(pretrain_denoiser(tiny_train(Phase::B, 1), tiny_model(1), tiny_images(2, 1)), Error);
}

TEST(TrainStep, DrawsTwoStatesPerImage) {
  Model m = tiny_model(4);
  auto images = tiny_images(5, 4);
  std::vector<std::uint64_t> keys = {0, 1, 2, 3, 4};
  StepResult r = train_step({images, keys}, m, sched(), RecapStrategy::class_only(), Phase::B, 2, 9, 1);
  EXPECT_EQ(r.state_draws, 2u * 5u);
  // Per state: one word for the timestep plus two per Gaussian pixel.
  EXPECT_EQ(r.rng_words, 5u * 2u * (1u + 2u * 192u));
}

TEST(TrainStep, MatchesStraightLineOracle) {
  Model m = tiny_model(5);
  auto images = tiny_images(3, 5);
  std::vector<std::uint64_t> keys = {7, 2, 11};
  StepResult r = train_step({images, keys}, m, sched(), RecapStrategy::random_subset(0.5), Phase::B, 2, 13, 4);
  double want = oracle::step_loss(m, images, keys, 0.5, 2, sched(), 13, 4);
  EXPECT_NEAR(r.loss, want, 1e-10);
}

TEST(TrainStep, OracleAgreesOnDefaultGeometry) {
  Model m = Model::init(EncoderConfig{}, DenoiserConfig{}, 6);
  std::vector<Image> images = {synth::to_image(synth::gen_labeled(3, 1).raster)};
  std::vector<std::uint64_t> keys = {0};
  double loss = batch_loss({images, keys}, m, sched(), RecapStrategy::random_subset(0.15), 2, 3, 1);
  EXPECT_NEAR(loss, oracle::step_loss(m, images, keys, 0.15, 2, sched(), 3, 1), 1e-10);
}

TEST(TrainStep, InvariantToBatchOrder) {
  Model m = tiny_model(7);
  auto images = tiny_images(4, 7);
  std::vector<std::uint64_t> keys = {0, 1, 2, 3};
  std::vector<Image> rev(images.rbegin(), images.rend());
  std::vector<std::uint64_t> rev_keys(keys.rbegin(), keys.rend());
  auto strategy = RecapStrategy::random_subset(0.5);
  StepResult a = train_step({images, keys}, m, sched(), strategy, Phase::B, 2, 3, 1);
  StepResult b = train_step({rev, rev_keys}, m, sched(), strategy, Phase::B, 2, 3, 1);
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  for (const auto& [name, g] : a.gradients) {
    EXPECT_LT(max_abs_diff(g, b.gradients.at(name)), 1e-14) << name;
  }
}

TEST(TrainStep, GradientMatchesFiniteDifferences) {
  Model m = tiny_model(8);
  auto images = tiny_images(2, 8);
  GradCheckResult r =
      check_phase_b_gradients(m, images, sched(), RecapStrategy::pooled_window(2), 2, 64, 8);
  EXPECT_EQ(r.checked, 64u);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(RunTraining, DeterministicGivenSeed) {
  auto images = tiny_images(5, 9);
  RunResult a = run_training(tiny_train(Phase::B, 4), tiny_model(9), images);
  RunResult b = run_training(tiny_train(Phase::B, 4), tiny_model(9), images);
  EXPECT_TRUE(a.model.params().bit_equal(b.model.params()));
  ASSERT_EQ(a.metrics.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.metrics[i].loss, b.metrics[i].loss);
}

TEST(RunTraining, ZeroStepsReturnsInitialization) {
  Model m = tiny_model(10);
  RunResult r = run_training(tiny_train(Phase::B, 0), m, tiny_images(2, 10));
  EXPECT_TRUE(r.model.params().bit_equal(m.params()));
  EXPECT_TRUE(r.metrics.empty());
}

TEST(RunTraining, MetricsCarryPhaseStepAndRate) {
  TrainConfig c = tiny_train(Phase::A, 3);
  RunResult r = pretrain_denoiser(c, tiny_model(11), tiny_images(4, 11));
  ASSERT_EQ(r.metrics.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.metrics[i].step, i + 1);
    EXPECT_EQ(r.metrics[i].phase, Phase::A);
    EXPECT_EQ(r.metrics[i].lr, c.learning_rate);
    EXPECT_TRUE(std::isfinite(r.metrics[i].loss));
  }
}

TEST(RunTraining, CallbackSeesEveryStep) {
  std::size_t calls = 0;
  run_training(tiny_train(Phase::B, 5), tiny_model(12), tiny_images(2, 12),
               [&](const MetricRow& row, const Model&) { EXPECT_EQ(row.step, ++calls); });
  EXPECT_EQ(calls, 5u);
}

TEST(RunTraining, PhaseALossDecreasesOnSyntheticCorpus) {
  std::vector<Image> images;
  for (const auto& c : synth::gen_training_corpus(32, 1)) images.push_back(synth::to_image(c.raster));
  TrainConfig c = TrainConfig::pretrain_defaults();
  c.steps = 60;
  c.batch_size = 4;
  c.seed = 1;
  RunResult r = pretrain_denoiser(c, Model::init(EncoderConfig{}, DenoiserConfig{}, 1), images);
  EXPECT_LT(mean_loss(r.metrics, 50, 60), mean_loss(r.metrics, 0, 10));
}

TEST(Model, CheckpointParamsRoundTrip) {
  Model m = tiny_model(13);
  ParamSet all = m.params();
  EXPECT_TRUE(all.contains("condition.bos"));
  Model back = Model::from_params(all, tiny_encoder_config(), tiny_denoiser_config());
  EXPECT_TRUE(back.params().bit_equal(all));
  EXPECT_THROW(Model::from_params(all, EncoderConfig{}, tiny_denoiser_config()), ShapeError);
}

TEST(MeanLoss, RangeChecked) {
  std::vector<MetricRow> rows = {{1, Phase::B, 1.0, 0.1}, {2, Phase::B, 3.0, 0.1}};
  EXPECT_DOUBLE_EQ(mean_loss(rows, 0, 2), 2.0);
  EXPECT_THROW(mean_loss(rows, 1, 1), RangeError);
  EXPECT_THROW(mean_loss(rows, 0, 3), RangeError);
}

}  // namespace
}  // namespace diva
