// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "diva/condition.hpp"

namespace diva {

struct DenoiserConfig {
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t patch_size = 4;
  std::size_t embed_dim = 64;
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t time_embed_dim = 64;
  /// Width of the incoming condition tokens (the encoder's embed_dim).
  std::size_t condition_dim = 64;

  std::size_t grid() const { return image_size / patch_size; }
  std::size_t num_patches() const { return grid() * grid(); }
  std::size_t patch_dim() const { return patch_size * patch_size * channels; }
  void validate() const;
};

/// Sinusoidal embedding: entries (2i, 2i+1) are (sin, cos) of t * 10000^(-2i/dim).
Tensor time_embed(double t, std::size_t dim);

/// Fresh denoiser parameters under the "denoiser." prefix, including the
/// condition adapter.
ParamSet init_denoiser(const DenoiserConfig& config, std::uint64_t seed);

/// Predicts the noise in `x_t` ([H x W x C]) at timestep `t` given `cond`.
/// Image patches get learned positions; condition tokens get none, so the
/// output does not depend on the order of the condition tokens.
Var denoise(const Tensor& x_t, std::size_t t, const Condition& cond, const BoundParams& params,
            const DenoiserConfig& config);

/// Mean squared error between predicted and true noise.
Var diffusion_loss(const Var& eps_hat, const Tensor& eps);
double diffusion_loss(const Tensor& eps_hat, const Tensor& eps);

}  // namespace diva
