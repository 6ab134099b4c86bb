// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/denoiser.hpp"

#include <cmath>
#include <string>

#include "diva/error.hpp"
#include "diva/nn.hpp"
#include "diva/ops.hpp"

namespace diva {

void DenoiserConfig::validate() const {
  if (patch_size == 0 || image_size % patch_size != 0) {
    throw ShapeError("denoiser image_size " + std::to_string(image_size) + " not divisible by patch_size " +
                     std::to_string(patch_size));
  }
  if (heads == 0 || embed_dim % heads != 0) {
    throw ShapeError("denoiser embed_dim " + std::to_string(embed_dim) + " not divisible by heads " +
                     std::to_string(heads));
  }
  if (time_embed_dim == 0 || time_embed_dim % 2 != 0) {
    throw RangeError("time_embed_dim must be even, got " + std::to_string(time_embed_dim));
  }
  if (depth == 0) throw RangeError("denoiser depth must be positive");
}

Tensor time_embed(double t, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw RangeError("time embedding dimension must be even, got " + std::to_string(dim));
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim / 2; ++i) {
    double freq = std::pow(10000.0, -2.0 * double(i) / double(dim));
    out[2 * i] = std::sin(t * freq);
    out[2 * i + 1] = std::cos(t * freq);
  }
  return Tensor({1, dim}, std::move(out));
}

ParamSet init_denoiser(const DenoiserConfig& config, std::uint64_t seed) {
  config.validate();
  RngStream rng(seed, 0xde0015e);
  ParamSet p;
  std::size_t d = config.embed_dim;
  nn::init_linear(p, "denoiser.patch_embed", config.patch_dim(), d, rng);
  p.set("denoiser.pos", normal_init({config.num_patches(), d}, 0.02, rng));
  nn::init_linear(p, "denoiser.time.fc1", config.time_embed_dim, d, rng);
  nn::init_linear(p, "denoiser.time.fc2", d, d, rng);
  nn::init_linear(p, "denoiser.adapter", config.condition_dim, d, rng);
  for (std::size_t i = 0; i < config.depth; ++i) {
    std::string b = "denoiser.blocks." + std::to_string(i);
    nn::init_layer_norm(p, b + ".ln1", d);
    nn::init_attention(p, b + ".self_attn", d, rng);
    nn::init_layer_norm(p, b + ".ln2", d);
    nn::init_attention(p, b + ".cross_attn", d, rng);
    nn::init_layer_norm(p, b + ".ln3", d);
    nn::init_mlp(p, b + ".mlp", d, 4 * d, rng);
  }
  nn::init_layer_norm(p, "denoiser.ln_final", d);
  nn::init_linear(p, "denoiser.out", d, config.patch_dim(), rng);
  return p;
}

Var denoise(const Tensor& x_t, std::size_t t, const Condition& cond, const BoundParams& p,
            const DenoiserConfig& config) {
  if (x_t.shape() != Shape{config.image_size, config.image_size, config.channels}) {
    throw ShapeError("denoiser expects " + shape_string({config.image_size, config.image_size, config.channels}) +
                     " input, got " + shape_string(x_t.shape()));
  }
  if (cond.embed_dim() != config.condition_dim) {
    throw ShapeError("condition width " + std::to_string(cond.embed_dim()) + " does not match adapter input " +
                     std::to_string(config.condition_dim));
  }
  Tape& tape = p["denoiser.pos"].tape();
  if (&cond.tokens().tape() != &tape) throw TapeError("condition and denoiser parameters live on different tapes");

  Var h = nn::linear(p, "denoiser.patch_embed", tape.constant(patchify(x_t, config.patch_size)));
  h = add(h, p["denoiser.pos"]);
  Var temb = tape.constant(time_embed(double(t), config.time_embed_dim));
  Var te = nn::linear(p, "denoiser.time.fc2", gelu(nn::linear(p, "denoiser.time.fc1", temb)));
  h = add_row(h, te);

  Var context = nn::linear(p, "denoiser.adapter", cond.tokens());
  for (std::size_t i = 0; i < config.depth; ++i) {
    std::string b = "denoiser.blocks." + std::to_string(i);
    Var n1 = nn::layer_norm(p, b + ".ln1", h);
    h = add(h, nn::attention(p, b + ".self_attn", n1, n1, config.heads));
    h = add(h, nn::attention(p, b + ".cross_attn", nn::layer_norm(p, b + ".ln2", h), context, config.heads));
    h = add(h, nn::mlp(p, b + ".mlp", nn::layer_norm(p, b + ".ln3", h)));
  }
  Var out = nn::linear(p, "denoiser.out", nn::layer_norm(p, "denoiser.ln_final", h));
  auto index = nn::unpatch_index(config.image_size, config.image_size, config.channels, config.patch_size);
  return gather(out, index, x_t.shape());
}

Var diffusion_loss(const Var& eps_hat, const Tensor& eps) {
  return mse(eps_hat, eps_hat.tape().constant(eps));
}

double diffusion_loss(const Tensor& eps_hat, const Tensor& eps) { return mse(eps_hat, eps); }

}  // namespace diva
