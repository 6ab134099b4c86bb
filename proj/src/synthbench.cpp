// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "diva/error.hpp"
#include "diva/ops.hpp"

namespace diva::synth {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr std::array<Rgb, 6> kBackgrounds = {{
    {20, 20, 30}, {40, 30, 20}, {25, 45, 35}, {50, 50, 60}, {35, 25, 50}, {15, 40, 55},
}};

constexpr std::array<Rgb, 8> kInks = {{
    {230, 60, 50}, {60, 200, 80}, {70, 110, 240}, {240, 220, 60},
    {220, 90, 220}, {80, 220, 230}, {245, 150, 40}, {240, 240, 240},
}};

enum Shape : std::size_t { kCircle, kSquare, kTriangle, kCross, kRing, kDiamond, kHBar, kVBar };

constexpr std::array<std::string_view, kNumShapeClasses> kShapeNames = {
    "circle", "square", "triangle", "cross", "ring", "diamond", "hbar", "vbar"};

// Integer direction vectors, 45 degrees apart.
constexpr std::array<std::array<int, 2>, 8> kDirections = {{
    {8, 0}, {6, 6}, {0, 8}, {-6, 6}, {-8, 0}, {-6, -6}, {0, -8}, {6, -6},
}};

void fill(Raster& r, Rgb c) {
  for (std::size_t i = 0; i < r.rgb.size(); i += 3) std::copy(c.begin(), c.end(), r.rgb.begin() + long(i));
}

void put(Raster& r, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= int(r.width) || y >= int(r.height)) return;
  std::size_t o = (std::size_t(y) * r.width + std::size_t(x)) * 3;
  std::copy(c.begin(), c.end(), r.rgb.begin() + long(o));
}

bool inside_shape(std::size_t shape, int dx, int dy, int radius) {
  int ax = std::abs(dx), ay = std::abs(dy);
  int d2 = dx * dx + dy * dy;
  switch (shape) {
    case kCircle:
      return d2 <= radius * radius;
    case kSquare:
      return ax <= radius && ay <= radius;
    case kTriangle:
      // Apex up: half-width grows by one pixel every two rows.
      return dy >= -radius && dy <= radius && 2 * ax <= dy + radius;
    case kCross:
      return (ax <= 1 && ay <= radius) || (ay <= 1 && ax <= radius);
    case kRing:
      return d2 <= radius * radius && d2 >= (radius - 2) * (radius - 2);
    case kDiamond:
      return ax + ay <= radius;
    case kHBar:
      return ax <= radius && ay <= 1;
    case kVBar:
      return ax <= 1 && ay <= radius;
  }
  return false;
}

void draw_shape(Raster& r, std::size_t shape, int cx, int cy, int radius, Rgb c) {
  for (int y = cy - radius; y <= cy + radius; ++y) {
    for (int x = cx - radius; x <= cx + radius; ++x) {
      if (inside_shape(shape, x - cx, y - cy, radius)) put(r, x, y, c);
    }
  }
}

// Pixels within sqrt(2) of the segment from (x0, y0) to (x0 + vx, y0 + vy).
void draw_spoke(Raster& r, int x0, int y0, int vx, int vy, Rgb c) {
  long len2 = long(vx) * vx + long(vy) * vy;
  for (int y = 0; y < int(r.height); ++y) {
    for (int x = 0; x < int(r.width); ++x) {
      long px = x - x0, py = y - y0;
      long t = px * vx + py * vy;
      long d2num;
      if (t <= 0) {
        d2num = (px * px + py * py) * len2;
      } else if (t >= len2) {
        long qx = px - vx, qy = py - vy;
        d2num = (qx * qx + qy * qy) * len2;
      } else {
        long cross = px * vy - py * vx;
        d2num = cross * cross;
      }
      if (d2num <= 2 * len2) put(r, x, y, c);
    }
  }
}

int pick(RngStream& rng, int lo, int hi) { return int(rng.uniform_int(std::uint64_t(lo), std::uint64_t(hi))); }

std::size_t pick_index(RngStream& rng, std::size_t n) { return std::size_t(rng.uniform_int(0, n - 1)); }

// Stream domains keep training, pair and labeled seeds disjoint.
constexpr std::uint64_t kPairDomain = 0x9a12;
constexpr std::uint64_t kLabeledDomain = 0x1abe1;
constexpr std::uint64_t kTrainDomain = 0x7a11;

ContrastivePair orientation_pair(RngStream& rng, std::uint64_t seed) {
  ContrastivePair p{{}, {}, VisualPattern::Orientation, seed};
  Rgb bg = kBackgrounds[pick_index(rng, kBackgrounds.size())];
  Rgb ink = kInks[pick_index(rng, kInks.size())];
  int cx = pick(rng, 10, 21), cy = pick(rng, 10, 21);
  std::size_t d1 = pick_index(rng, 8);
  std::size_t d2 = (d1 + 2 + pick_index(rng, 5)) % 8;
  for (auto [img, d] : {std::pair{&p.image_a, d1}, std::pair{&p.image_b, d2}}) {
    fill(*img, bg);
    draw_spoke(*img, cx, cy, kDirections[d][0], kDirections[d][1], ink);
    draw_shape(*img, kCircle, cx, cy, 2, ink);
  }
  return p;
}

ContrastivePair quantity_pair(RngStream& rng, std::uint64_t seed) {
  ContrastivePair p{{}, {}, VisualPattern::Quantity, seed};
  Rgb bg = kBackgrounds[pick_index(rng, kBackgrounds.size())];
  Rgb ink = kInks[pick_index(rng, kInks.size())];
  std::size_t n = 1 + pick_index(rng, 4);
  // 4x4 grid of 8px cells; 3x3 squares in the cell centres stay 5px apart.
  std::array<std::size_t, 16> slots;
  std::iota(slots.begin(), slots.end(), 0);
  for (std::size_t i = 0; i < n + 1; ++i) std::swap(slots[i], slots[i + pick_index(rng, 16 - i)]);
  fill(p.image_a, bg);
  fill(p.image_b, bg);
  for (std::size_t i = 0; i < n + 1; ++i) {
    int cx = int(slots[i] % 4) * 8 + 4, cy = int(slots[i] / 4) * 8 + 4;
    if (i < n) draw_shape(p.image_a, kSquare, cx, cy, 1, ink);
    draw_shape(p.image_b, kSquare, cx, cy, 1, ink);
  }
  p.count_a = n;
  p.count_b = n + 1;
  return p;
}

ContrastivePair color_pair(RngStream& rng, std::uint64_t seed) {
  ContrastivePair p{{}, {}, VisualPattern::Color, seed};
  Rgb bg = kBackgrounds[pick_index(rng, kBackgrounds.size())];
  std::size_t c1 = pick_index(rng, kInks.size());
  std::size_t c2 = (c1 + 1 + pick_index(rng, kInks.size() - 1)) % kInks.size();
  std::size_t shape = pick_index(rng, kNumShapeClasses);
  int radius = pick(rng, 5, 7);
  int cx = pick(rng, 9, 22), cy = pick(rng, 9, 22);
  fill(p.image_a, bg);
  fill(p.image_b, bg);
  draw_shape(p.image_a, shape, cx, cy, radius, kInks[c1]);
  draw_shape(p.image_b, shape, cx, cy, radius, kInks[c2]);
  return p;
}

ContrastivePair position_pair(RngStream& rng, std::uint64_t seed) {
  ContrastivePair p{{}, {}, VisualPattern::Position, seed};
  Rgb bg = kBackgrounds[pick_index(rng, kBackgrounds.size())];
  Rgb ink = kInks[pick_index(rng, kInks.size())];
  std::size_t shape = pick_index(rng, kNumShapeClasses);
  int radius = pick(rng, 4, 6);
  int lo = radius + 1, hi = 30 - radius;
  int ax = pick(rng, lo, hi), ay = pick(rng, lo, hi);
  int bx = ax, by = ay;
  while (std::abs(bx - ax) < 6 && std::abs(by - ay) < 6) {
    bx = pick(rng, lo, hi);
    by = pick(rng, lo, hi);
  }
  fill(p.image_a, bg);
  fill(p.image_b, bg);
  draw_shape(p.image_a, shape, ax, ay, radius, ink);
  draw_shape(p.image_b, shape, bx, by, radius, ink);
  return p;
}

ContrastivePair structure_pair(RngStream& rng, std::uint64_t seed) {
  ContrastivePair p{{}, {}, VisualPattern::Structure, seed};
  Rgb bg = kBackgrounds[pick_index(rng, kBackgrounds.size())];
  std::size_t c1 = pick_index(rng, kInks.size());
  std::size_t c2 = (c1 + 1 + pick_index(rng, kInks.size() - 1)) % kInks.size();
  int cx = pick(rng, 8, 23), cy = pick(rng, 10, 21);
  bool vertical = rng.bernoulli(0.5);
  int ox = vertical ? 0 : 5, oy = vertical ? 5 : 0;
  // Same two parts, swapped arrangement.
  fill(p.image_a, bg);
  draw_shape(p.image_a, kSquare, cx - ox, cy - oy, 3, kInks[c1]);
  draw_shape(p.image_a, kCircle, cx + ox, cy + oy, 3, kInks[c2]);
  fill(p.image_b, bg);
  draw_shape(p.image_b, kCircle, cx - ox, cy - oy, 3, kInks[c2]);
  draw_shape(p.image_b, kSquare, cx + ox, cy + oy, 3, kInks[c1]);
  return p;
}

}  // namespace

std::array<std::uint8_t, 3> Raster::at(std::size_t x, std::size_t y) const {
  std::size_t o = (y * width + x) * 3;
  return {rgb[o], rgb[o + 1], rgb[o + 2]};
}

Image to_image(const Raster& r) {
  std::vector<double> px(r.rgb.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = double(r.rgb[i]) / 127.5 - 1.0;
  return Image(Tensor({r.height, r.width, 3}, std::move(px)));
}

Raster to_raster(const Image& image) {
  if (image.channels() != 3) throw ShapeError("to_raster expects 3 channels");
  Raster r;
  r.width = image.width();
  r.height = image.height();
  r.rgb.resize(image.tensor().size());
  auto px = image.tensor().data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    double v = std::round((px[i] + 1.0) * 127.5);
    r.rgb[i] = std::uint8_t(std::clamp(v, 0.0, 255.0));
  }
  return r;
}

std::string_view pattern_name(VisualPattern p) {
  switch (p) {
    case VisualPattern::Orientation:
      return "orientation";
    case VisualPattern::Quantity:
      return "quantity";
    case VisualPattern::Color:
      return "color";
    case VisualPattern::Position:
      return "position";
    case VisualPattern::Structure:
      return "structure";
  }
  return "?";
}

VisualPattern parse_pattern(std::string_view name) {
  for (auto p : kAllPatterns) {
    if (pattern_name(p) == name) return p;
  }
  throw FormatError("unknown visual pattern '" + std::string(name) + "'");
}

ContrastivePair gen_pair(VisualPattern pattern, std::uint64_t seed) {
  RngStream rng(seed, kPairDomain + std::uint64_t(pattern));
  switch (pattern) {
    case VisualPattern::Orientation:
      return orientation_pair(rng, seed);
    case VisualPattern::Quantity:
      return quantity_pair(rng, seed);
    case VisualPattern::Color:
      return color_pair(rng, seed);
    case VisualPattern::Position:
      return position_pair(rng, seed);
    case VisualPattern::Structure:
      return structure_pair(rng, seed);
  }
  throw RangeError("unknown pattern");
}

std::string_view shape_class_name(std::size_t label) {
  if (label >= kNumShapeClasses) throw RangeError("shape label out of range");
  return kShapeNames[label];
}

LabeledImage gen_labeled(std::size_t label, std::uint64_t seed) {
  if (label >= kNumShapeClasses) throw RangeError("shape label out of range");
  RngStream rng(seed, kLabeledDomain + label);
  LabeledImage out{{}, label, seed};
  Rgb bg = kBackgrounds[pick_index(rng, kBackgrounds.size())];
  Rgb ink = kInks[pick_index(rng, kInks.size())];
  int radius = pick(rng, 5, 7);
  int cx = pick(rng, 9, 22), cy = pick(rng, 9, 22);
  fill(out.raster, bg);
  draw_shape(out.raster, label, cx, cy, radius, ink);
  return out;
}

std::vector<LabeledImage> gen_labeled_set(std::size_t count, std::uint64_t seed) {
  std::vector<LabeledImage> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen_labeled(i % kNumShapeClasses, mix64(seed) + i));
  return out;
}

std::vector<CorpusImage> gen_training_corpus(std::size_t count, std::uint64_t seed) {
  std::vector<CorpusImage> out;
  out.reserve(count);
  std::uint64_t base = mix64(seed ^ kTrainDomain);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t s = base + i;
    std::size_t slot = i % 6;
    if (slot < 5) {
      auto pair = gen_pair(kAllPatterns[slot], s);
      out.push_back({(i / 6) % 2 ? pair.image_b : pair.image_a, std::string(pattern_name(pair.pattern)), s});
    } else {
      std::size_t label = (i / 6) % kNumShapeClasses;
      out.push_back({gen_labeled(label, s).raster, std::string(shape_class_name(label)), s});
    }
  }
  return out;
}

std::vector<ContrastivePair> gen_pair_set(std::size_t per_pattern, std::uint64_t seed) {
  std::vector<ContrastivePair> out;
  out.reserve(per_pattern * kAllPatterns.size());
  std::uint64_t base = mix64(seed ^ kPairDomain);
  for (auto p : kAllPatterns) {
    for (std::size_t i = 0; i < per_pattern; ++i) out.push_back(gen_pair(p, base + i));
  }
  return out;
}

std::size_t count_components(const Raster& r) {
  auto bg = r.at(0, 0);
  std::vector<char> seen(r.width * r.height, 0);
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < seen.size(); ++start) {
    if (seen[start] || r.at(start % r.width, start / r.width) == bg) continue;
    ++count;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      std::size_t x = i % r.width, y = i / r.width;
      auto visit = [&](std::size_t nx, std::size_t ny) {
        std::size_t j = ny * r.width + nx;
        if (!seen[j] && r.at(nx, ny) != bg) {
          seen[j] = 1;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(x - 1, y);
      if (x + 1 < r.width) visit(x + 1, y);
      if (y > 0) visit(x, y - 1);
      if (y + 1 < r.height) visit(x, y + 1);
    }
  }
  return count;
}

double pair_separation(const ParamSet& encoder, const EncoderConfig& config,
                       const std::vector<ContrastivePair>& pairs) {
  if (pairs.empty()) throw RangeError("pair_separation: empty pair list");
  std::vector<Tensor> a, b;
  a.reserve(pairs.size());
  b.reserve(pairs.size());
  for (const auto& p : pairs) {
    a.push_back(embed_image(to_image(p.image_a), encoder, config));
    b.push_back(embed_image(to_image(p.image_b), encoder, config));
  }
  return embedding_separation(a, b);
}

double embedding_separation(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.empty()) throw RangeError("pair_separation: empty pair list");
  if (a.size() != b.size()) throw ShapeError("pair_separation: unequal embedding lists");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += 1.0 - cosine(a[i], b[i]);
  return total / double(a.size());
}

std::array<double, 5> pair_separation_by_pattern(const ParamSet& encoder, const EncoderConfig& config,
                                                 const std::vector<ContrastivePair>& pairs) {
  std::array<double, 5> out;
  for (std::size_t i = 0; i < kAllPatterns.size(); ++i) {
    std::vector<ContrastivePair> subset;
    for (const auto& p : pairs) {
      if (p.pattern == kAllPatterns[i]) subset.push_back(p);
    }
    out[i] = subset.empty() ? std::numeric_limits<double>::quiet_NaN() : pair_separation(encoder, config, subset);
  }
  return out;
}

double knn_accuracy(const std::vector<Tensor>& reference, const std::vector<std::size_t>& reference_labels,
                    const std::vector<Tensor>& query, const std::vector<std::size_t>& query_labels, std::size_t k) {
  if (k == 0) throw RangeError("knn: k must be at least 1");
  if (k > reference.size()) {
    throw RangeError("knn: k = " + std::to_string(k) + " exceeds reference size " + std::to_string(reference.size()));
  }
  if (reference.size() != reference_labels.size() || query.size() != query_labels.size()) {
    throw ShapeError("knn: embedding and label counts differ");
  }
  if (query.empty()) throw RangeError("knn: empty query set");
  std::size_t num_labels = 1 + *std::max_element(reference_labels.begin(), reference_labels.end());

  std::size_t correct = 0;
  std::vector<std::pair<double, std::size_t>> sims(reference.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    for (std::size_t r = 0; r < reference.size(); ++r) sims[r] = {cosine(query[q], reference[r]), r};
    std::partial_sort(sims.begin(), sims.begin() + long(k), sims.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    std::vector<std::size_t> votes(num_labels, 0);
    for (std::size_t i = 0; i < k; ++i) ++votes[reference_labels[sims[i].second]];
    std::size_t best_votes = *std::max_element(votes.begin(), votes.end());
    std::size_t predicted = 0;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t label = reference_labels[sims[i].second];
      if (votes[label] == best_votes) {
        predicted = label;
        break;
      }
    }
    if (predicted == query_labels[q]) ++correct;
  }
  return 100.0 * double(correct) / double(query.size());
}

double knn_retention(const ParamSet& encoder, const EncoderConfig& config, const std::vector<LabeledImage>& set,
                     std::size_t k) {
  std::size_t half = set.size() / 2;
  if (half == 0) throw RangeError("knn_retention: labeled set too small");
  std::vector<Tensor> ref, query;
  std::vector<std::size_t> ref_labels, query_labels;
  for (std::size_t i = 0; i < set.size(); ++i) {
    Tensor e = embed_image(to_image(set[i].raster), encoder, config);
    if (i < half) {
      ref.push_back(std::move(e));
      ref_labels.push_back(set[i].label);
    } else {
      query.push_back(std::move(e));
      query_labels.push_back(set[i].label);
    }
  }
  return knn_accuracy(ref, ref_labels, query, query_labels, k);
}

Raster translate(const Raster& r, int dx, int dy) {
  Raster out = r;
  int w = int(r.width), h = int(r.height);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int sx = std::clamp(x - dx, 0, w - 1), sy = std::clamp(y - dy, 0, h - 1);
      put(out, x, y, r.at(std::size_t(sx), std::size_t(sy)));
    }
  }
  return out;
}

double augmentation_consistency(const ParamSet& encoder, const EncoderConfig& config,
                                const std::vector<Raster>& images, RngStream& rng, int max_shift) {
  if (images.empty()) throw RangeError("augmentation_consistency: no images");
  if (max_shift < 0) throw RangeError("augmentation_consistency: negative shift");
  double total = 0.0;
  auto shift = [&] { return max_shift == 0 ? 0 : pick(rng, 0, 2 * max_shift) - max_shift; };
  for (const auto& img : images) {
    int ax = shift(), ay = shift(), bx = shift(), by = shift();
    Tensor a = embed_image(to_image(translate(img, ax, ay)), encoder, config);
    Tensor b = embed_image(to_image(translate(img, bx, by)), encoder, config);
    total += dot(a, b);
  }
  return total / double(images.size());
}

}  // namespace diva::synth
