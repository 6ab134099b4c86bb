// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/condition.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "diva/error.hpp"

namespace diva {

void RecapStrategy::validate() const {
  switch (kind) {
    case Kind::RandomSubset:
      if (!(probability > 0.0 && probability <= 1.0)) {
        throw RangeError("recap probability must be in (0, 1], got " + std::to_string(probability));
      }
      break;
    case Kind::PooledWindow:
      if (window < 1) throw RangeError("recap window must be at least 1");
      break;
    default:
      break;
  }
}

std::string RecapStrategy::name() const {
  switch (kind) {
    case Kind::ClassOnly:
      return "class";
    case Kind::All:
      return "all";
    case Kind::PooledWindow:
      return "pooled:" + std::to_string(window);
    case Kind::RandomSubset: {
      std::ostringstream os;
      os << "random:" << probability;
      return os.str();
    }
  }
  return "?";
}

namespace {

double parse_probability(std::string_view s, std::string_view whole) {
  std::string buf(s);
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(buf, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != buf.size() || buf.empty()) throw FormatError("bad recap strategy '" + std::string(whole) + "'");
  return p;
}

std::size_t parse_window(std::string_view s, std::string_view whole) {
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad recap strategy '" + std::string(whole) + "'");
  }
  return k;
}

}  // namespace

RecapStrategy RecapStrategy::parse(std::string_view text) {
  RecapStrategy s;
  if (text == "class" || text == "class_only") {
    s = class_only();
  } else if (text == "all") {
    s = all();
  } else if (text.starts_with("random:")) {
    s = random_subset(parse_probability(text.substr(7), text));
  } else if (text.starts_with("pooled:")) {
    s = pooled_window(parse_window(text.substr(7), text));
  } else if (text.starts_with("pool")) {
    s = pooled_window(parse_window(text.substr(4), text));
  } else {
    s = random_subset(parse_probability(text, text));
  }
  s.validate();
  return s;
}

Sentinels Sentinels::make(std::size_t dim, std::uint64_t seed) {
  RngStream rng(seed, 0x5e77);
  return {sample_gaussian({1, dim}, rng), sample_gaussian({1, dim}, rng)};
}

Sentinels Sentinels::from_params(const ParamSet& params) {
  return {params.at("condition.bos"), params.at("condition.eos")};
}

void Sentinels::store(ParamSet& params) const {
  params.set("condition.bos", bos);
  params.set("condition.eos", eos);
}

std::vector<std::size_t> select_patches(const RecapStrategy& strategy, std::size_t num_patches, RngStream& rng) {
  strategy.validate();
  std::vector<std::size_t> keep;
  switch (strategy.kind) {
    case RecapStrategy::Kind::ClassOnly:
    case RecapStrategy::Kind::PooledWindow:
      break;
    case RecapStrategy::Kind::All:
      for (std::size_t i = 0; i < num_patches; ++i) keep.push_back(i);
      break;
    case RecapStrategy::Kind::RandomSubset:
      for (std::size_t i = 0; i < num_patches; ++i) {
        if (rng.bernoulli(strategy.probability)) keep.push_back(i);
      }
      break;
  }
  return keep;
}

Condition build_condition(const TokenSequence& ts, const RecapStrategy& strategy, RngStream& rng,
                          const Sentinels& sentinels) {
  strategy.validate();
  std::size_t dim = ts.embed_dim();
  if (sentinels.bos.size() != dim || sentinels.eos.size() != dim) {
    throw ShapeError("sentinel width does not match token width " + std::to_string(dim));
  }
  Tape& tape = ts.tokens().tape();
  Var bos = tape.constant(sentinels.bos.reshaped({1, dim}));
  Var eos = tape.constant(sentinels.eos.reshaped({1, dim}));
  const Var& tokens = ts.tokens();

  std::vector<Var> parts{bos};
  if (strategy.kind == RecapStrategy::Kind::PooledWindow) {
    parts.push_back(ts.class_token());
    std::size_t n = ts.num_patches();
    for (std::size_t start = 0; start < n; start += strategy.window) {
      std::size_t len = std::min(strategy.window, n - start);
      parts.push_back(mean_rows(slice_rows(tokens, 1 + start, len)));
    }
  } else {
    // Row 0 is the class token; selected patches follow in grid order.
    auto keep = select_patches(strategy, ts.num_patches(), rng);
    std::vector<std::size_t> index;
    index.reserve((keep.size() + 1) * dim);
    for (std::size_t c = 0; c < dim; ++c) index.push_back(c);
    for (auto k : keep) {
      for (std::size_t c = 0; c < dim; ++c) index.push_back((k + 1) * dim + c);
    }
    parts.push_back(gather(tokens, index, {keep.size() + 1, dim}));
  }
  parts.push_back(eos);
  return Condition(concat_rows(parts));
}

double expected_density(const RecapStrategy& strategy, std::size_t num_patches) {
  strategy.validate();
  switch (strategy.kind) {
    case RecapStrategy::Kind::ClassOnly:
      return 0.0;
    case RecapStrategy::Kind::RandomSubset:
      return strategy.probability * double(num_patches);
    case RecapStrategy::Kind::PooledWindow:
      return double((num_patches + strategy.window - 1) / strategy.window);
    case RecapStrategy::Kind::All:
      return double(num_patches);
  }
  return 0.0;
}

}  // namespace diva
