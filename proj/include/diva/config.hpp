// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "diva/trainer.hpp"

namespace diva {

/// Everything one run needs. Parsed from an INI-style file:
///
///   [encoder]   image_size=32 patch_size=4 embed_dim=64 depth=4 heads=4
///   [denoiser]  patch_size=4 embed_dim=64 depth=4 heads=4 time_embed_dim=64
///   [schedule]  timesteps=1000 beta_min=1e-4 beta_max=0.02
///   [trainer]   steps=500 batch_size=32 states_per_image=2 learning_rate=1e-4
///               momentum=0.9 seed=0 pretrain_steps=2000
///               pretrain_learning_rate=0.1
///   [recap]     strategy=random:0.15   (class | random:P | pooled:K | all)
///   [dataset]   source=synthetic train_images=512 pairs_per_pattern=256
///               labeled_images=1024 knn_k=5 consistency_images=256 seed=0
///   [output]    dir=runs/default
///
/// Unknown sections or keys, duplicate keys and unparsable values are errors.
/// The denoiser inherits image_size and channels from the encoder, and its
/// condition width is the encoder's embed_dim.
struct RunConfig {
  EncoderConfig encoder;
  DenoiserConfig denoiser;

  std::size_t timesteps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;

  std::size_t steps = 500;
  std::size_t batch_size = 32;
  std::size_t states_per_image = 2;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  std::size_t pretrain_steps = 2000;
  double pretrain_learning_rate = 0.1;

  RecapStrategy recap = RecapStrategy::random_subset(0.15);

  /// "synthetic" generates the corpus in memory; anything else is a
  /// directory written by gen-data.
  std::string source = "synthetic";
  std::size_t train_images = 512;
  std::size_t pairs_per_pattern = 256;
  std::size_t labeled_images = 1024;
  std::size_t knn_k = 5;
  std::size_t consistency_images = 256;
  std::uint64_t dataset_seed = 0;

  std::filesystem::path output_dir = "runs/default";

  TrainConfig phase_a() const;
  TrainConfig phase_b() const;
  /// Copies the shared geometry into the denoiser config and checks both.
  void resolve();
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Every key with its resolved value; parses back to an identical config.
std::string format_run_config(const RunConfig& config);

}  // namespace diva
