// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "diva/denoiser.hpp"
#include "diva/gradcheck.hpp"
#include "diva/schedule.hpp"

namespace diva {

/// A: pretrain the denoiser against a frozen encoder snapshot.
/// B: tune the encoder against the frozen denoiser.
enum class Phase { A, B };

std::string_view phase_name(Phase phase);

struct TrainConfig {
  Phase phase = Phase::B;
  std::size_t steps = 500;
  std::size_t batch_size = 32;
  std::size_t states_per_image = 2;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  RecapStrategy recap = RecapStrategy::random_subset(0.15);
  std::size_t timesteps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;

  /// Phase-A defaults: 2000 steps at learning rate 0.1.
  static TrainConfig pretrain_defaults();

  void validate() const;
  NoiseSchedule schedule() const { return NoiseSchedule(timesteps, beta_min, beta_max); }
};

/// Encoder (theta), denoiser (phi) and the frozen condition sentinels.
struct Model {
  EncoderConfig encoder_config;
  DenoiserConfig denoiser_config;
  ParamSet encoder;
  ParamSet denoiser;
  Sentinels sentinels;

  static Model init(const EncoderConfig& encoder_config, const DenoiserConfig& denoiser_config, std::uint64_t seed);
  /// Rebuilds a model from a checkpoint holding encoder.*, denoiser.* and
  /// condition.* entries.
  static Model from_params(const ParamSet& params, const EncoderConfig& encoder_config,
                           const DenoiserConfig& denoiser_config);
  /// All parameters in one named set, ready for checkpointing.
  ParamSet params() const;
};

/// Momentum buffers, one per trainable parameter.
struct OptimizerState {
  ParamSet velocity;
};

/// v <- momentum * v + g; p <- p - lr * v, for every entry of `grads`.
void sgd_update(ParamSet& params, const ParamSet& grads, OptimizerState& state, double learning_rate,
                double momentum);

/// Per-sample random stream for one step, keyed by the sample's dataset
/// index so draws do not depend on its position in the batch.
RngStream sample_stream(std::uint64_t seed, std::uint64_t step, std::uint64_t sample_key);

struct StepResult {
  double loss = 0.0;
  /// Gradients of the trainable side only (encoder in B, denoiser in A).
  ParamSet gradients;
  /// (timestep, noise) state pairs drawn this step.
  std::size_t state_draws = 0;
  /// 64-bit words consumed across all per-sample streams.
  std::uint64_t rng_words = 0;
};

struct StepInputs {
  std::span<const Image> images;
  /// Dataset index of each image, used to key its random stream.
  std::span<const std::uint64_t> keys;
  /// Optional frozen encoder outputs (Phase A), one [1 + P x D] per image.
  std::span<const Tensor> cached_tokens = {};
};

/// One optimization step's loss and gradients: encode, build the condition,
/// draw N timesteps and noises per image, diffuse, denoise, and average the
/// squared-error loss over every (image, state) pair.
StepResult train_step(const StepInputs& batch, const Model& model, const NoiseSchedule& sched,
                      const RecapStrategy& recap, Phase phase, std::size_t states_per_image, std::uint64_t seed,
                      std::uint64_t step);

/// Loss only, nothing trainable. Same draws as train_step.
double batch_loss(const StepInputs& batch, const Model& model, const NoiseSchedule& sched,
                  const RecapStrategy& recap, std::size_t states_per_image, std::uint64_t seed, std::uint64_t step);

struct MetricRow {
  std::size_t step;
  Phase phase;
  double loss;
  double lr;
};

using StepCallback = std::function<void(const MetricRow& row, const Model& model)>;

struct RunResult {
  Model model;
  std::vector<MetricRow> metrics;
};

/// Runs `config.steps` sequential steps from `model` over `dataset`.
/// Batches walk a seeded per-epoch permutation.
RunResult run_training(const TrainConfig& config, Model model, const std::vector<Image>& dataset,
                       const StepCallback& on_step = {});

/// Phase A; throws unless `config.phase` is A.
RunResult pretrain_denoiser(const TrainConfig& config, Model model, const std::vector<Image>& dataset,
                            const StepCallback& on_step = {});

/// Mean diffusion loss over a fixed probe set of (image, timestep, noise)
/// draws. Identical seeds give identical draws across models and
/// strategies (RandomSubset selections aside).
double probe_loss(const Model& model, const std::vector<Image>& images, const NoiseSchedule& sched,
                  const RecapStrategy& recap, std::size_t states_per_image, std::uint64_t seed);

/// Finite-difference check of the Phase-B loss with respect to `samples`
/// randomly chosen encoder parameter entries.
GradCheckResult check_phase_b_gradients(const Model& model, const std::vector<Image>& images,
                                        const NoiseSchedule& sched, const RecapStrategy& recap,
                                        std::size_t states_per_image, std::size_t samples, std::uint64_t seed,
                                        double h = 1e-5, double abs_floor = 1e-8);

/// Mean of metrics[begin, end) losses.
double mean_loss(const std::vector<MetricRow>& metrics, std::size_t begin, std::size_t end);

}  // namespace diva
