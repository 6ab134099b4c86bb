// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/corpus.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "diva/checkpoint.hpp"
#include "diva/ppm.hpp"

namespace diva {

namespace fs = std::filesystem;

std::vector<Image> Corpus::train_images() const {
  std::vector<Image> out;
  out.reserve(train.size());
  for (const auto& c : train) out.push_back(synth::to_image(c.raster));
  return out;
}

Corpus generate_corpus(const RunConfig& config) {
  if (config.encoder.image_size != synth::kImageSize || config.encoder.channels != 3) {
    throw ShapeError("synthetic corpus is 32x32 RGB; encoder.image_size is " +
                     std::to_string(config.encoder.image_size));
  }
  Corpus c;
  c.train = synth::gen_training_corpus(config.train_images, config.dataset_seed);
  c.pairs = synth::gen_pair_set(config.pairs_per_pattern, config.dataset_seed);
  c.labeled = synth::gen_labeled_set(config.labeled_images, config.dataset_seed);
  return c;
}

namespace {

std::string numbered(std::string_view stem, std::size_t i, std::string_view suffix = "") {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return std::string(stem) + "_" + buf + std::string(suffix) + ".ppm";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t label_of(const std::string& kind) {
  for (std::size_t i = 0; i < synth::kNumShapeClasses; ++i) {
    if (synth::shape_class_name(i) == kind) return i;
  }
  throw FormatError("manifest: unknown shape class '" + kind + "'");
}

}  // namespace

void export_corpus(const Corpus& corpus, const fs::path& dir) {
  for (const char* sub : {"train", "pairs", "labeled"}) fs::create_directories(dir / sub);
  std::ostringstream manifest;
  manifest << "filename,split,kind,seed\n";
  for (std::size_t i = 0; i < corpus.train.size(); ++i) {
    const auto& img = corpus.train[i];
    std::string name = "train/" + numbered("train", i);
    write_ppm(dir / name, img.raster);
    manifest << name << ",train," << img.kind << ',' << img.seed << '\n';
  }
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const auto& p = corpus.pairs[i];
    std::string kind(synth::pattern_name(p.pattern));
    std::string a = "pairs/" + numbered(kind, i, "_a");
    std::string b = "pairs/" + numbered(kind, i, "_b");
    write_ppm(dir / a, p.image_a);
    write_ppm(dir / b, p.image_b);
    manifest << a << ",pair_a," << kind << ',' << p.seed << '\n';
    manifest << b << ",pair_b," << kind << ',' << p.seed << '\n';
  }
  for (std::size_t i = 0; i < corpus.labeled.size(); ++i) {
    const auto& l = corpus.labeled[i];
    std::string kind(synth::shape_class_name(l.label));
    std::string name = "labeled/" + numbered(kind, i);
    write_ppm(dir / name, l.raster);
    manifest << name << ",labeled," << kind << ',' << l.seed << '\n';
  }
  write_file_atomic(dir / "manifest.csv", manifest.str());
}

Corpus import_corpus(const fs::path& dir, std::size_t image_size) {
  auto bytes = read_file(dir / "manifest.csv");
  std::stringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  if (!std::getline(in, line) || line != "filename,split,kind,seed") {
    throw FormatError("manifest: missing header 'filename,split,kind,seed' in " + (dir / "manifest.csv").string());
  }
  PpmSize size{image_size, image_size};
  Corpus c;
  std::size_t line_no = 1;
  bool pending_a = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    auto where = "manifest line " + std::to_string(line_no) + ": ";
    if (fields.size() != 4) throw FormatError(where + "expected 4 fields");
    const auto& [file, split, kind, seed_text] = std::tie(fields[0], fields[1], fields[2], fields[3]);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (ec != std::errc() || ptr != seed_text.data() + seed_text.size()) throw FormatError(where + "bad seed");
    auto raster = read_ppm_raster(dir / file, size);
    if (split == "train") {
      c.train.push_back({std::move(raster), kind, seed});
    } else if (split == "pair_a") {
      if (pending_a) throw FormatError(where + "pair_a without a following pair_b");
      synth::ContrastivePair p;
      p.image_a = std::move(raster);
      p.pattern = synth::parse_pattern(kind);
      p.seed = seed;
      c.pairs.push_back(std::move(p));
      pending_a = true;
    } else if (split == "pair_b") {
      if (!pending_a || c.pairs.back().seed != seed || synth::pattern_name(c.pairs.back().pattern) != kind) {
        throw FormatError(where + "pair_b does not match the preceding pair_a");
      }
      c.pairs.back().image_b = std::move(raster);
      pending_a = false;
    } else if (split == "labeled") {
      c.labeled.push_back({std::move(raster), label_of(kind), seed});
    } else {
      throw FormatError(where + "unknown split '" + split + "'");
    }
    if (split != "pair_a" && pending_a) throw FormatError(where + "pair_a without a following pair_b");
  }
  if (pending_a) throw FormatError("manifest: trailing pair_a without pair_b");
  return c;
}

Corpus load_corpus(const RunConfig& config) {
  if (config.source == "synthetic") return generate_corpus(config);
  return import_corpus(config.source, config.encoder.image_size);
}

}  // namespace diva
