// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/encoder.hpp"

#include <string>

#include "diva/error.hpp"
#include "diva/nn.hpp"
#include "diva/ops.hpp"

namespace diva {

Image::Image(std::size_t height, std::size_t width, std::size_t channels)
    : pixels_({height, width, channels}) {}

Image::Image(Tensor pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rank() != 3) throw ShapeError("image tensor must be [H x W x C], got " + shape_string(pixels_.shape()));
  pixels_.set_grad_enabled(false);
}

Tensor patchify(const Tensor& image, std::size_t patch_size) {
  if (image.rank() != 3) throw ShapeError("patchify expects [H x W x C], got " + shape_string(image.shape()));
  auto index = nn::patch_index(image.dim(0), image.dim(1), image.dim(2), patch_size);
  std::vector<double> out(index.size());
  auto src = image.data();
  for (std::size_t i = 0; i < index.size(); ++i) out[i] = src[index[i]];
  std::size_t per_patch = patch_size * patch_size * image.dim(2);
  return Tensor({index.size() / per_patch, per_patch}, std::move(out));
}

Image unpatchify(const Tensor& patches, std::size_t height, std::size_t width, std::size_t channels,
                 std::size_t patch_size) {
  auto index = nn::patch_index(height, width, channels, patch_size);
  if (patches.size() != index.size()) {
    throw ShapeError("unpatchify: " + shape_string(patches.shape()) + " does not hold a " + std::to_string(height) +
                     "x" + std::to_string(width) + "x" + std::to_string(channels) + " image");
  }
  std::vector<double> out(index.size());
  auto src = patches.data();
  for (std::size_t i = 0; i < index.size(); ++i) out[index[i]] = src[i];
  return Image(Tensor({height, width, channels}, std::move(out)));
}

void EncoderConfig::validate() const {
  if (patch_size == 0 || image_size % patch_size != 0) {
    throw ShapeError("encoder image_size " + std::to_string(image_size) + " not divisible by patch_size " +
                     std::to_string(patch_size));
  }
  if (heads == 0 || embed_dim % heads != 0) {
    throw ShapeError("encoder embed_dim " + std::to_string(embed_dim) + " not divisible by heads " +
                     std::to_string(heads));
  }
  if (depth == 0) throw RangeError("encoder depth must be positive");
}

TokenSequence::TokenSequence(Var tokens) : tokens_(std::move(tokens)) {
  if (tokens_.value().rank() != 2 || tokens_.value().dim(0) < 1) {
    throw ShapeError("token sequence must be [1 + patches x dim], got " + shape_string(tokens_.shape()));
  }
}

Tensor TokenSequence::class_token_value() const {
  auto row = tokens_.value().data().first(embed_dim());
  return Tensor({embed_dim()}, std::vector<double>(row.begin(), row.end()));
}

ParamSet init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  RngStream rng(seed, 0xe1c0de);
  ParamSet p;
  std::size_t d = config.embed_dim;
  nn::init_linear(p, "encoder.patch_embed", config.patch_dim(), d, rng);
  p.set("encoder.cls", normal_init({1, d}, 0.02, rng));
  p.set("encoder.pos", normal_init({config.num_patches() + 1, d}, 0.02, rng));
  for (std::size_t i = 0; i < config.depth; ++i) {
    std::string b = "encoder.blocks." + std::to_string(i);
    nn::init_layer_norm(p, b + ".ln1", d);
    nn::init_attention(p, b + ".attn", d, rng);
    nn::init_layer_norm(p, b + ".ln2", d);
    nn::init_mlp(p, b + ".mlp", d, 4 * d, rng);
  }
  nn::init_layer_norm(p, "encoder.ln_final", d);
  return p;
}

TokenSequence encode(const Image& image, const BoundParams& p, const EncoderConfig& config) {
  if (image.height() != config.image_size || image.width() != config.image_size ||
      image.channels() != config.channels) {
    throw ShapeError("encoder expects " + std::to_string(config.image_size) + "x" +
                     std::to_string(config.image_size) + "x" + std::to_string(config.channels) + " images, got " +
                     shape_string(image.tensor().shape()));
  }
  Tape& tape = p["encoder.cls"].tape();
  Var patches = tape.constant(patchify(image, config.patch_size));
  Var x = nn::linear(p, "encoder.patch_embed", patches);
  Var rows[] = {p["encoder.cls"], x};
  x = add(concat_rows(rows), p["encoder.pos"]);
  for (std::size_t i = 0; i < config.depth; ++i) {
    std::string b = "encoder.blocks." + std::to_string(i);
    Var h = nn::layer_norm(p, b + ".ln1", x);
    x = add(x, nn::attention(p, b + ".attn", h, h, config.heads));
    x = add(x, nn::mlp(p, b + ".mlp", nn::layer_norm(p, b + ".ln2", x)));
  }
  return TokenSequence(nn::layer_norm(p, "encoder.ln_final", x));
}

Tensor embed_global(const TokenSequence& ts) { return l2_normalize(ts.class_token_value()); }

Tensor embed_image(const Image& image, const ParamSet& params, const EncoderConfig& config) {
  Tape tape;
  BoundParams bound(tape, params, false);
  return embed_global(encode(image, bound, config));
}

}  // namespace diva
