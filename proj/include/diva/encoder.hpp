// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "diva/params.hpp"

namespace diva {

/// Image as a [height x width x channels] tensor with values in [-1, 1].
class Image {
 public:
  Image(std::size_t height, std::size_t width, std::size_t channels = 3);
  explicit Image(Tensor pixels);

  std::size_t height() const { return pixels_.dim(0); }
  std::size_t width() const { return pixels_.dim(1); }
  std::size_t channels() const { return pixels_.dim(2); }
  const Tensor& tensor() const { return pixels_; }
  std::span<double> mutable_data() { return pixels_.mutable_data(); }

  bool operator==(const Image& other) const { return pixels_.bit_equal(other.pixels_); }

 private:
  Tensor pixels_;
};

/// [H x W x C] -> [num_patches x P*P*C], row-major patch grid. Lossless.
Tensor patchify(const Tensor& image, std::size_t patch_size);
inline Tensor patchify(const Image& image, std::size_t patch_size) { return patchify(image.tensor(), patch_size); }
Image unpatchify(const Tensor& patches, std::size_t height, std::size_t width, std::size_t channels,
                 std::size_t patch_size);

struct EncoderConfig {
  std::size_t image_size = 32;
  std::size_t patch_size = 4;
  std::size_t embed_dim = 64;
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t channels = 3;

  std::size_t grid() const { return image_size / patch_size; }
  std::size_t num_patches() const { return grid() * grid(); }
  std::size_t patch_dim() const { return patch_size * patch_size * channels; }
  void validate() const;
};

/// Class token followed by the patch tokens in row-major grid order, as a
/// single [1 + num_patches x embed_dim] var.
class TokenSequence {
 public:
  explicit TokenSequence(Var tokens);

  const Var& tokens() const { return tokens_; }
  std::size_t num_patches() const { return tokens_.value().dim(0) - 1; }
  std::size_t embed_dim() const { return tokens_.value().dim(1); }

  Var class_token() const { return slice_rows(tokens_, 0, 1); }
  Var patch_tokens() const { return slice_rows(tokens_, 1, num_patches()); }
  Tensor class_token_value() const;

 private:
  Var tokens_;
};

/// Fresh encoder parameters under the "encoder." prefix.
ParamSet init_encoder(const EncoderConfig& config, std::uint64_t seed);

/// Vision-transformer forward pass recorded on the parameters' tape.
TokenSequence encode(const Image& image, const BoundParams& params, const EncoderConfig& config);

/// L2-normalized class token.
Tensor embed_global(const TokenSequence& ts);

/// Forward-only convenience: encodes on a private tape and returns the
/// global embedding.
Tensor embed_image(const Image& image, const ParamSet& params, const EncoderConfig& config);

}  // namespace diva
