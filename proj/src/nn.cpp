// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/nn.hpp"

#include <cmath>

#include "diva/error.hpp"

namespace diva::nn {

void init_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, RngStream& rng) {
  params.set(prefix + ".weight", normal_init({in, out}, 1.0 / std::sqrt(double(in)), rng));
  params.set(prefix + ".bias", Tensor({out}));
}

void init_layer_norm(ParamSet& params, const std::string& prefix, std::size_t dim) {
  params.set(prefix + ".gain", Tensor::full({dim}, 1.0));
  params.set(prefix + ".bias", Tensor({dim}));
}

void init_attention(ParamSet& params, const std::string& prefix, std::size_t dim, RngStream& rng) {
  for (const char* role : {".q", ".k", ".v", ".o"}) init_linear(params, prefix + role, dim, dim, rng);
}

void init_mlp(ParamSet& params, const std::string& prefix, std::size_t dim, std::size_t hidden, RngStream& rng) {
  init_linear(params, prefix + ".fc1", dim, hidden, rng);
  init_linear(params, prefix + ".fc2", hidden, dim, rng);
}

Var linear(const BoundParams& p, const std::string& prefix, const Var& x) {
  return add_row(matmul(x, p[prefix + ".weight"]), p[prefix + ".bias"]);
}

Var layer_norm(const BoundParams& p, const std::string& prefix, const Var& x) {
  return diva::layer_norm(x, p[prefix + ".gain"], p[prefix + ".bias"], kLayerNormEps);
}

Var attention(const BoundParams& p, const std::string& prefix, const Var& x, const Var& context, std::size_t heads) {
  Var q = linear(p, prefix + ".q", x);
  Var k = linear(p, prefix + ".k", context);
  Var v = linear(p, prefix + ".v", context);
  std::size_t dim = q.value().dim(1);
  if (heads == 0 || dim % heads != 0) throw ShapeError("attention: width not divisible by head count");
  std::size_t head_dim = dim / heads;
  double inv_scale = 1.0 / std::sqrt(double(head_dim));

  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = heads == 1 ? q : slice_cols(q, h * head_dim, head_dim);
    Var kh = heads == 1 ? k : slice_cols(k, h * head_dim, head_dim);
    Var vh = heads == 1 ? v : slice_cols(v, h * head_dim, head_dim);
    Var weights = softmax(scale(matmul_nt(qh, kh), inv_scale), 1);
    outs.push_back(matmul(weights, vh));
  }
  Var merged = heads == 1 ? outs.front() : concat_cols(outs);
  return linear(p, prefix + ".o", merged);
}

Var mlp(const BoundParams& p, const std::string& prefix, const Var& x) {
  return linear(p, prefix + ".fc2", gelu(linear(p, prefix + ".fc1", x)));
}

std::vector<std::size_t> patch_index(std::size_t height, std::size_t width, std::size_t channels, std::size_t patch) {
  if (patch == 0 || height % patch != 0 || width % patch != 0) {
    throw ShapeError("image " + std::to_string(height) + "x" + std::to_string(width) +
                     " is not divisible by patch size " + std::to_string(patch));
  }
  std::size_t gh = height / patch, gw = width / patch;
  std::vector<std::size_t> index;
  index.reserve(height * width * channels);
  for (std::size_t py = 0; py < gh; ++py) {
    for (std::size_t px = 0; px < gw; ++px) {
      for (std::size_t y = 0; y < patch; ++y) {
        for (std::size_t x = 0; x < patch; ++x) {
          for (std::size_t c = 0; c < channels; ++c) {
            index.push_back(((py * patch + y) * width + (px * patch + x)) * channels + c);
          }
        }
      }
    }
  }
  return index;
}

std::vector<std::size_t> unpatch_index(std::size_t height, std::size_t width, std::size_t channels,
                                       std::size_t patch) {
  auto forward = patch_index(height, width, channels, patch);
  std::vector<std::size_t> inverse(forward.size());
  for (std::size_t i = 0; i < forward.size(); ++i) inverse[forward[i]] = i;
  return inverse;
}

}  // namespace diva::nn
