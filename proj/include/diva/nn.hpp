// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "diva/params.hpp"

// Transformer building blocks shared by the encoder and the denoiser.
// Parameters live in a ParamSet under `<prefix>.<role>` names.
namespace diva::nn {

inline constexpr double kLayerNormEps = 1e-5;

void init_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, RngStream& rng);
void init_layer_norm(ParamSet& params, const std::string& prefix, std::size_t dim);
void init_attention(ParamSet& params, const std::string& prefix, std::size_t dim, RngStream& rng);
void init_mlp(ParamSet& params, const std::string& prefix, std::size_t dim, std::size_t hidden, RngStream& rng);

/// x[m x in] * W + b
Var linear(const BoundParams& p, const std::string& prefix, const Var& x);
Var layer_norm(const BoundParams& p, const std::string& prefix, const Var& x);

/// Multi-head scaled dot-product attention. Queries come from `x`, keys and
/// values from `context`; no positional information is added here.
Var attention(const BoundParams& p, const std::string& prefix, const Var& x, const Var& context, std::size_t heads);

/// fc2(gelu(fc1(x)))
Var mlp(const BoundParams& p, const std::string& prefix, const Var& x);

/// Flat-index map taking a [H x W x C] image to [num_patches x P*P*C]
/// patch rows (row-major patch grid, then (y, x, c) inside a patch).
std::vector<std::size_t> patch_index(std::size_t height, std::size_t width, std::size_t channels, std::size_t patch);

/// Inverse of patch_index.
std::vector<std::size_t> unpatch_index(std::size_t height, std::size_t width, std::size_t channels,
                                       std::size_t patch);

}  // namespace diva::nn
