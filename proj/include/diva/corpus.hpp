// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "diva/config.hpp"
#include "diva/synthbench.hpp"

namespace diva {

/// Training images plus the held-out evaluation sets.
struct Corpus {
  std::vector<synth::CorpusImage> train;
  std::vector<synth::ContrastivePair> pairs;
  std::vector<synth::LabeledImage> labeled;

  std::vector<Image> train_images() const;
};

/// Generates the corpus described by the [dataset] section.
Corpus generate_corpus(const RunConfig& config);

/// Writes train/, pairs/ and labeled/ PPM files plus manifest.csv with
/// columns filename,split,kind,seed. Split is train, pair_a, pair_b or
/// labeled; every pair_b row directly follows its pair_a row.
void export_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Reads a directory written by export_corpus. Images must match the
/// encoder's image size.
Corpus import_corpus(const std::filesystem::path& dir, std::size_t image_size);

/// generate_corpus for source "synthetic", import_corpus otherwise.
Corpus load_corpus(const RunConfig& config);

}  // namespace diva
