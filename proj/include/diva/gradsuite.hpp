// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diva/denoiser.hpp"
#include "diva/gradcheck.hpp"

namespace diva {

struct NamedGradCheck {
  std::string name;
  GradCheckResult result;
};

/// Finite-difference check of every differentiable primitive, each wrapped
/// in a fixed random projection so every output entry carries weight.
std::vector<NamedGradCheck> primitive_gradcheck_suite(std::uint64_t seed);

/// Tiny model geometry for end-to-end checks: 8x8 images, patch 4, width 8,
/// one block, two heads.
EncoderConfig tiny_encoder_config();
DenoiserConfig tiny_denoiser_config();

/// Phase-B loss gradient against central differences on `samples` encoder
/// entries of a freshly initialized tiny model.
GradCheckResult end_to_end_gradcheck(std::size_t samples, std::uint64_t seed);

}  // namespace diva
