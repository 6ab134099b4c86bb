// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "diva/encoder.hpp"

namespace diva::synth {

inline constexpr std::size_t kImageSize = 32;

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Raster {
  std::size_t width = kImageSize;
  std::size_t height = kImageSize;
  std::vector<std::uint8_t> rgb = std::vector<std::uint8_t>(kImageSize * kImageSize * 3);

  std::array<std::uint8_t, 3> at(std::size_t x, std::size_t y) const;
  bool operator==(const Raster&) const = default;
};

/// Bytes 0..255 map linearly onto [-1, 1].
Image to_image(const Raster& r);
/// Inverse of to_image for values produced by it (rounds to nearest byte).
Raster to_raster(const Image& image);

enum class VisualPattern { Orientation, Quantity, Color, Position, Structure };
inline constexpr std::array<VisualPattern, 5> kAllPatterns = {VisualPattern::Orientation, VisualPattern::Quantity,
                                                              VisualPattern::Color, VisualPattern::Position,
                                                              VisualPattern::Structure};
std::string_view pattern_name(VisualPattern p);
VisualPattern parse_pattern(std::string_view name);

/// Two scenes that differ only in the attribute named by `pattern`.
struct ContrastivePair {
  Raster image_a;
  Raster image_b;
  VisualPattern pattern;
  std::uint64_t seed;
  /// Object counts for Quantity pairs (b holds one more); zero otherwise.
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

ContrastivePair gen_pair(VisualPattern pattern, std::uint64_t seed);

inline constexpr std::size_t kNumShapeClasses = 8;
std::string_view shape_class_name(std::size_t label);

struct LabeledImage {
  Raster raster;
  std::size_t label;
  std::uint64_t seed;
};

/// One shape of class `label` at a seeded position, size and colour.
LabeledImage gen_labeled(std::size_t label, std::uint64_t seed);

/// Balanced set: image i has label i % kNumShapeClasses. The first half is
/// the kNN reference split, the second half the query split.
std::vector<LabeledImage> gen_labeled_set(std::size_t count, std::uint64_t seed);

struct CorpusImage {
  Raster raster;
  std::string kind;  // pattern name or shape class name
  std::uint64_t seed;
};

/// Unlabeled training scenes mixing every pattern generator and the shape
/// classes, drawn from a seed domain disjoint from the evaluation sets.
std::vector<CorpusImage> gen_training_corpus(std::size_t count, std::uint64_t seed);

/// `per_pattern` held-out pairs for every pattern.
std::vector<ContrastivePair> gen_pair_set(std::size_t per_pattern, std::uint64_t seed);

/// Number of 4-connected regions whose colour differs from pixel (0, 0).
std::size_t count_components(const Raster& r);

// Evaluation probes. All embeddings are L2-normalized class tokens.

/// Mean over pairs of 1 - cos(embed(a), embed(b)).
double pair_separation(const ParamSet& encoder, const EncoderConfig& config, const std::vector<ContrastivePair>& pairs);

/// Mean of 1 - cos(a[i], b[i]); inputs need not be normalized.
double embedding_separation(const std::vector<Tensor>& a, const std::vector<Tensor>& b);

/// Per-pattern means in kAllPatterns order (NaN for absent patterns).
std::array<double, 5> pair_separation_by_pattern(const ParamSet& encoder, const EncoderConfig& config,
                                                 const std::vector<ContrastivePair>& pairs);

/// k-nearest-neighbour accuracy (percent) of `query` against `reference`
/// by cosine similarity. Votes tie-break towards the nearest neighbour.
double knn_accuracy(const std::vector<Tensor>& reference, const std::vector<std::size_t>& reference_labels,
                    const std::vector<Tensor>& query, const std::vector<std::size_t>& query_labels, std::size_t k);

double knn_retention(const ParamSet& encoder, const EncoderConfig& config, const std::vector<LabeledImage>& set,
                     std::size_t k);

/// Copy of `r` shifted by (dx, dy) with edge pixels replicated.
Raster translate(const Raster& r, int dx, int dy);

/// Mean cosine between embeddings of two independently jittered copies
/// (shifts drawn uniformly from [-max_shift, max_shift]) of each image.
double augmentation_consistency(const ParamSet& encoder, const EncoderConfig& config,
                                const std::vector<Raster>& images, RngStream& rng, int max_shift = 1);

}  // namespace diva::synth
