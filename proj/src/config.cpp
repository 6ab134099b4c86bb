// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "diva/checkpoint.hpp"

namespace diva {

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view v, const std::string& key) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw FormatError("config: bad value '" + std::string(v) + "' for " + key);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <typename T>
Field size_field(T RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view v) { c.*member = parse_number<T>(v, "value"); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view v) { c.*member = parse_number<double>(v, "value"); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

template <typename S>
Field nested_size(S RunConfig::*outer, std::size_t S::*inner) {
  return {[=](RunConfig& c, std::string_view v) { (c.*outer).*inner = parse_number<std::size_t>(v, "value"); },
          [=](const RunConfig& c) { return std::to_string((c.*outer).*inner); }};
}

// Ordered by section, then key, in the order format_run_config emits them.
const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>& schema() {
  static const auto* s = new std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>{
      {"encoder",
       {{"image_size", nested_size(&RunConfig::encoder, &EncoderConfig::image_size)},
        {"patch_size", nested_size(&RunConfig::encoder, &EncoderConfig::patch_size)},
        {"embed_dim", nested_size(&RunConfig::encoder, &EncoderConfig::embed_dim)},
        {"depth", nested_size(&RunConfig::encoder, &EncoderConfig::depth)},
        {"heads", nested_size(&RunConfig::encoder, &EncoderConfig::heads)}}},
      {"denoiser",
       {{"patch_size", nested_size(&RunConfig::denoiser, &DenoiserConfig::patch_size)},
        {"embed_dim", nested_size(&RunConfig::denoiser, &DenoiserConfig::embed_dim)},
        {"depth", nested_size(&RunConfig::denoiser, &DenoiserConfig::depth)},
        {"heads", nested_size(&RunConfig::denoiser, &DenoiserConfig::heads)},
        {"time_embed_dim", nested_size(&RunConfig::denoiser, &DenoiserConfig::time_embed_dim)}}},
      {"schedule",
       {{"timesteps", size_field(&RunConfig::timesteps)},
        {"beta_min", double_field(&RunConfig::beta_min)},
        {"beta_max", double_field(&RunConfig::beta_max)}}},
      {"trainer",
       {{"steps", size_field(&RunConfig::steps)},
        {"batch_size", size_field(&RunConfig::batch_size)},
        {"states_per_image", size_field(&RunConfig::states_per_image)},
        {"learning_rate", double_field(&RunConfig::learning_rate)},
        {"momentum", double_field(&RunConfig::momentum)},
        {"seed", size_field(&RunConfig::seed)},
        {"pretrain_steps", size_field(&RunConfig::pretrain_steps)},
        {"pretrain_learning_rate", double_field(&RunConfig::pretrain_learning_rate)}}},
      {"recap",
       {{"strategy",
         {[](RunConfig& c, std::string_view v) { c.recap = RecapStrategy::parse(v); },
          [](const RunConfig& c) { return c.recap.name(); }}}}},
      {"dataset",
       {{"source",
         {[](RunConfig& c, std::string_view v) { c.source = std::string(v); },
          [](const RunConfig& c) { return c.source; }}},
        {"train_images", size_field(&RunConfig::train_images)},
        {"pairs_per_pattern", size_field(&RunConfig::pairs_per_pattern)},
        {"labeled_images", size_field(&RunConfig::labeled_images)},
        {"knn_k", size_field(&RunConfig::knn_k)},
        {"consistency_images", size_field(&RunConfig::consistency_images)},
        {"seed", size_field(&RunConfig::dataset_seed)}}},
      {"output",
       {{"dir",
         {[](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
          [](const RunConfig& c) { return c.output_dir.string(); }}}}},
  };
  return *s;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& [name, fields] : schema()) {
    if (name != section) continue;
    for (const auto& [k, f] : fields) {
      if (k == key) return &f;
    }
  }
  return nullptr;
}

bool known_section(std::string_view section) {
  for (const auto& entry : schema()) {
    if (entry.first == section) return true;
  }
  return false;
}

}  // namespace

TrainConfig RunConfig::phase_a() const {
  TrainConfig t = phase_b();
  t.phase = Phase::A;
  t.steps = pretrain_steps;
  t.learning_rate = pretrain_learning_rate;
  return t;
}

TrainConfig RunConfig::phase_b() const {
  TrainConfig t;
  t.phase = Phase::B;
  t.steps = steps;
  t.batch_size = batch_size;
  t.states_per_image = states_per_image;
  t.learning_rate = learning_rate;
  t.momentum = momentum;
  t.seed = seed;
  t.recap = recap;
  t.timesteps = timesteps;
  t.beta_min = beta_min;
  t.beta_max = beta_max;
  return t;
}

void RunConfig::resolve() {
  denoiser.image_size = encoder.image_size;
  denoiser.channels = encoder.channels;
  denoiser.condition_dim = encoder.embed_dim;
  encoder.validate();
  denoiser.validate();
  phase_a().validate();
  phase_b().validate();
  if (train_images == 0) throw RangeError("config: dataset.train_images must be positive");
  if (knn_k == 0 || knn_k % 2 == 0) throw RangeError("config: dataset.knn_k must be odd");
  if (output_dir.empty()) throw RangeError("config: output.dir must not be empty");
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    auto where = [&] { return "config line " + std::to_string(line_no) + ": "; };

    auto hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError(where() + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section)) throw FormatError(where() + "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError(where() + "expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) throw FormatError(where() + "key '" + key + "' outside any section");
    const Field* field = find_field(section, key);
    if (!field) throw FormatError(where() + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) {
      throw FormatError(where() + "duplicate key '" + key + "' in [" + section + "]");
    }
    try {
      field->set(config, value);
    } catch (const Error& e) {
      throw FormatError(where() + section + "." + key + ": " + e.what());
    }
  }
  config.resolve();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return parse_run_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_run_config(const RunConfig& config) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, fields] : schema()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, field] : fields) out << key << " = " << field.get(config) << '\n';
  }
  return out.str();
}

}  // namespace diva
