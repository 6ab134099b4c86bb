// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "diva/error.hpp"
#include "diva/ops.hpp"
#include "diva/synthbench.hpp"

namespace diva::synth {
namespace {

TEST(Generators, DeterministicPerSeed) {
  for (VisualPattern p : kAllPatterns) {
    EXPECT_EQ(gen_pair(p, 42).image_a, gen_pair(p, 42).image_a) << pattern_name(p);
    EXPECT_EQ(gen_pair(p, 42).image_b, gen_pair(p, 42).image_b) << pattern_name(p);
  }
  EXPECT_EQ(gen_labeled(3, 9).raster, gen_labeled(3, 9).raster);
}

TEST(Generators, PairsActuallyDiffer) {
  for (VisualPattern p : kAllPatterns) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ContrastivePair pair = gen_pair(p, seed);
      EXPECT_FALSE(pair.image_a == pair.image_b) << pattern_name(p) << " seed " << seed;
    }
  }
}

TEST(Generators, QuantityPairsDifferByOneObject) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ContrastivePair pair = gen_pair(VisualPattern::Quantity, seed);
    EXPECT_EQ(pair.count_b, pair.count_a + 1);
    EXPECT_EQ(count_components(pair.image_a), pair.count_a) << seed;
    EXPECT_EQ(count_components(pair.image_b), pair.count_b) << seed;
  }
}

TEST(Generators, ColorPairsShareBackgroundAndLayout) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ContrastivePair pair = gen_pair(VisualPattern::Color, seed);
    auto bg = pair.image_a.at(0, 0);
    EXPECT_EQ(bg, pair.image_b.at(0, 0));
    for (std::size_t y = 0; y < kImageSize; ++y) {
      for (std::size_t x = 0; x < kImageSize; ++x) {
        EXPECT_EQ(pair.image_a.at(x, y) == bg, pair.image_b.at(x, y) == bg) << seed;
      }
    }
  }
}

TEST(Generators, LabeledSetIsBalanced) {
  auto set = gen_labeled_set(64, 1);
  ASSERT_EQ(set.size(), 64u);
  for (std::size_t i = 0; i < set.size(); ++i) EXPECT_EQ(set[i].label, i % kNumShapeClasses);
  std::set<std::vector<std::uint8_t>> distinct;
  for (const auto& l : set) distinct.insert(l.raster.rgb);
  EXPECT_EQ(distinct.size(), set.size());
}

TEST(Generators, PairSetCoversEveryPattern) {
  auto pairs = gen_pair_set(4, 3);
  ASSERT_EQ(pairs.size(), 20u);
  std::array<int, 5> counts{};
  for (const auto& p : pairs) ++counts[std::size_t(p.pattern)];
  for (int c : counts) EXPECT_EQ(c, 4);
}

TEST(Generators, PatternNamesRoundTrip) {
  for (VisualPattern p : kAllPatterns) EXPECT_EQ(parse_pattern(pattern_name(p)), p);
  EXPECT_THROW(parse_pattern("viewpoint"), Error);
}

TEST(Raster, ImageRoundTrip) {
  Raster r = gen_labeled(5, 2).raster;
  Image img = to_image(r);
  for (double v : img.tensor().data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(to_raster(img), r);
}

TEST(Raster, TranslateReplicatesEdges) {
  Raster r = gen_labeled(1, 4).raster;
  EXPECT_EQ(translate(r, 0, 0), r);
  Raster s = translate(r, 2, 0);
  for (std::size_t y = 0; y < kImageSize; ++y) {
    EXPECT_EQ(s.at(0, y), r.at(0, y));
    EXPECT_EQ(s.at(1, y), r.at(0, y));
    EXPECT_EQ(s.at(10, y), r.at(8, y));
  }
}

TEST(EmbeddingSeparation, Examples) {
  std::vector<Tensor> a = {Tensor::vector({1, 0}), Tensor::vector({0, 2})};
  EXPECT_DOUBLE_EQ(embedding_separation(a, a), 0.0);
  std::vector<Tensor> b = {Tensor::vector({0, 3}), Tensor::vector({5, 0})};
  EXPECT_NEAR(embedding_separation(a, b), 1.0, 1e-15);
  std::vector<Tensor> c = {Tensor::vector({-1, 0}), Tensor::vector({1, 1})};
  EXPECT_DOUBLE_EQ(embedding_separation(a, c), embedding_separation(c, a));
  EXPECT_NEAR(embedding_separation(a, c), (2.0 + (1.0 - std::sqrt(0.5))) / 2.0, 1e-15);
}

TEST(EmbeddingSeparation, InvariantToGlobalRotation) {
  RngStream rng(8, 0);
  std::vector<Tensor> a, b;
  for (int i = 0; i < 16; ++i) {
    a.push_back(sample_gaussian({6}, rng));
    b.push_back(sample_gaussian({6}, rng));
  }
  // Householder reflection I - 2 u u^T / |u|^2 is orthogonal.
  Tensor u = sample_gaussian({6, 1}, rng);
  Tensor q = sub(Tensor(Tensor::from_matrix(RowMatrix::Identity(6, 6))),
                 scale(matmul(u, transpose(u)), 2.0 / dot(u, u)));
  auto rotate = [&](const std::vector<Tensor>& xs) {
    std::vector<Tensor> out;
    for (const auto& x : xs) out.push_back(matmul(q, x.reshaped({6, 1})).reshaped({6}));
    return out;
  };
  EXPECT_NEAR(embedding_separation(rotate(a), rotate(b)), embedding_separation(a, b), 1e-14);
}

TEST(EmbeddingSeparation, RejectsBadInputs) {
  EXPECT_THROW(embedding_separation({}, {}), RangeError);
  EXPECT_THROW(embedding_separation({Tensor::vector({1})}, {}), ShapeError);
}

std::vector<Tensor> random_embeddings(std::size_t n, std::size_t dim, RngStream& rng) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_gaussian({dim}, rng));
  return out;
}

TEST(Knn, DuplicatedReferenceIsPerfectAtK1) {
  RngStream rng(1, 0);
  auto ref = random_embeddings(40, 16, rng);
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < ref.size(); ++i) labels.push_back(i % 8);
  EXPECT_DOUBLE_EQ(knn_accuracy(ref, labels, ref, labels, 1), 100.0);
}

TEST(Knn, RandomEmbeddingsScoreNearChance) {
  RngStream rng(2, 0);
  auto ref = random_embeddings(1024, 32, rng);
  auto query = random_embeddings(1024, 32, rng);
  std::vector<std::size_t> rl, ql;
  for (std::size_t i = 0; i < 1024; ++i) {
    rl.push_back(rng.uniform_int(0, 7));
    ql.push_back(rng.uniform_int(0, 7));
  }
  double acc = knn_accuracy(ref, rl, query, ql, 5);
  EXPECT_NEAR(acc, 12.5, 5.0);
}

TEST(Knn, InvariantToPositiveScaling) {
  RngStream rng(3, 0);
  auto ref = random_embeddings(64, 8, rng);
  auto query = random_embeddings(64, 8, rng);
  std::vector<std::size_t> rl, ql;
  for (std::size_t i = 0; i < 64; ++i) {
    rl.push_back(i % 4);
    ql.push_back((i * 7) % 4);
  }
  std::vector<Tensor> scaled;
  for (std::size_t i = 0; i < query.size(); ++i) scaled.push_back(scale(query[i], 0.5 + double(i)));
  EXPECT_DOUBLE_EQ(knn_accuracy(ref, rl, query, ql, 3), knn_accuracy(ref, rl, scaled, ql, 3));
}

TEST(Knn, RejectsBadArguments) {
  std::vector<Tensor> ref = {Tensor::vector({1, 0}), Tensor::vector({0, 1})};
  std::vector<std::size_t> labels = {0, 1};
  EXPECT_THROW(knn_accuracy(ref, labels, ref, labels, 3), RangeError);
  EXPECT_THROW(knn_accuracy(ref, labels, ref, labels, 0), RangeError);
  EXPECT_THROW(knn_accuracy(ref, {0}, ref, labels, 1), ShapeError);
}

EncoderConfig small_encoder() {
  EncoderConfig c;
  c.embed_dim = 16;
  c.depth = 1;
  c.heads = 2;
  return c;
}

TEST(Probes, AugmentationConsistencyWithoutJitterIsOne) {
  EncoderConfig c = small_encoder();
  ParamSet enc = init_encoder(c, 1);
  std::vector<Raster> images;
  for (std::size_t i = 0; i < 4; ++i) images.push_back(gen_labeled(i, i).raster);
  RngStream rng(1, 0);
  EXPECT_NEAR(augmentation_consistency(enc, c, images, rng, 0), 1.0, 1e-12);
}

TEST(Probes, AugmentationConsistencyDeterministicPerSeed) {
  EncoderConfig c = small_encoder();
  ParamSet enc = init_encoder(c, 2);
  std::vector<Raster> images;
  for (std::size_t i = 0; i < 4; ++i) images.push_back(gen_labeled(i, i + 10).raster);
  RngStream r1(5, 0), r2(5, 0);
  double a = augmentation_consistency(enc, c, images, r1, 2);
  double b = augmentation_consistency(enc, c, images, r2, 2);
  EXPECT_EQ(a, b);
  EXPECT_LE(a, 1.0 + 1e-12);
}

TEST(Probes, PairSeparationMatchesEmbeddingSeparation) {
  EncoderConfig c = small_encoder();
  ParamSet enc = init_encoder(c, 3);
  auto pairs = gen_pair_set(2, 7);
  std::vector<Tensor> a, b;
  for (const auto& p : pairs) {
    a.push_back(embed_image(to_image(p.image_a), enc, c));
    b.push_back(embed_image(to_image(p.image_b), enc, c));
  }
  EXPECT_NEAR(pair_separation(enc, c, pairs), embedding_separation(a, b), 1e-14);
  auto by = pair_separation_by_pattern(enc, c, pairs);
  double total = 0.0;
  for (double v : by) total += v;
  EXPECT_NEAR(total / 5.0, pair_separation(enc, c, pairs), 1e-12);
}

}  // namespace
}  // namespace diva::synth
