// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

// Full-length training runs on the synthetic corpus. Each takes minutes.

#include <gtest/gtest.h>

#include "diva/config.hpp"
#include "diva/corpus.hpp"
#include "diva/synthbench.hpp"
#include "diva/trainer.hpp"

namespace diva {
namespace {

std::vector<Image> corpus_images(std::size_t n, std::uint64_t seed) {
  std::vector<Image> out;
  for (const auto& c : synth::gen_training_corpus(n, seed)) out.push_back(synth::to_image(c.raster));
  return out;
}

TEST(TrainingRun, PhaseALossFallsOverDefaultBudget) {
  TrainConfig c = TrainConfig::pretrain_defaults();
  c.batch_size = 8;
  RunResult r = pretrain_denoiser(c, Model::init(EncoderConfig{}, DenoiserConfig{}, 0), corpus_images(512, 0));
  ASSERT_EQ(r.metrics.size(), 2000u);
  EXPECT_LT(r.metrics.back().loss, r.metrics.front().loss);
  EXPECT_LT(mean_loss(r.metrics, 1950, 2000), mean_loss(r.metrics, 0, 50));
}

TEST(TrainingRun, PhaseBSmokeOnSixtyFourImages) {
  auto images = corpus_images(64, 0);
  TrainConfig a = TrainConfig::pretrain_defaults();
  a.steps = 1000;
  RunResult ra = pretrain_denoiser(a, Model::init(EncoderConfig{}, DenoiserConfig{}, 0), images);
  TrainConfig b;
  RunResult rb = run_training(b, ra.model, images);
  ASSERT_EQ(rb.metrics.size(), 500u);
  double head = mean_loss(rb.metrics, 0, 50), tail = mean_loss(rb.metrics, 450, 500);
  EXPECT_LE(tail, 0.8 * head) << "first-50 mean " << head << ", final-50 mean " << tail << ", ratio " << tail / head;
}

TEST(TrainingRun, DefaultRunKeepsJitterConsistency) {
  RunConfig config;
  config.resolve();
  Corpus corpus = generate_corpus(config);
  auto images = corpus.train_images();
  TrainConfig a = config.phase_a();
  a.steps = 1000;
  Model init = Model::init(config.encoder, config.denoiser, config.seed);
  RunResult ra = pretrain_denoiser(a, init, images);
  RunResult rb = run_training(config.phase_b(), ra.model, images);
  std::vector<synth::Raster> rasters;
  for (std::size_t i = 0; i < config.consistency_images; ++i) rasters.push_back(corpus.labeled[i].raster);
  RngStream r1(config.dataset_seed, 0xa06), r2(config.dataset_seed, 0xa06);
  double pre = synth::augmentation_consistency(init.encoder, config.encoder, rasters, r1);
  double post = synth::augmentation_consistency(rb.model.encoder, config.encoder, rasters, r2);
  EXPECT_LE(pre - post, 0.05) << "consistency " << pre << " -> " << post;
}

}  // namespace
}  // namespace diva
