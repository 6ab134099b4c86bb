// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

#include "diva/error.hpp"
#include "diva/ops.hpp"

namespace diva {

std::string_view phase_name(Phase phase) { return phase == Phase::A ? "A" : "B"; }

TrainConfig TrainConfig::pretrain_defaults() {
  TrainConfig c;
  c.phase = Phase::A;
  c.steps = 2000;
  c.learning_rate = 0.1;
  return c;
}

void TrainConfig::validate() const {
  if (states_per_image < 1) throw RangeError("states_per_image must be at least 1");
  if (batch_size < 1) throw RangeError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw RangeError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw RangeError("momentum must lie in [0, 1)");
  recap.validate();
  NoiseSchedule(timesteps, beta_min, beta_max);
}

Model Model::init(const EncoderConfig& encoder_config, const DenoiserConfig& denoiser_config, std::uint64_t seed) {
  if (denoiser_config.condition_dim != encoder_config.embed_dim) {
    throw ShapeError("denoiser condition_dim must equal encoder embed_dim");
  }
  return {encoder_config, denoiser_config, init_encoder(encoder_config, seed), init_denoiser(denoiser_config, seed),
          Sentinels::make(encoder_config.embed_dim, seed)};
}

Model Model::from_params(const ParamSet& params, const EncoderConfig& encoder_config,
                         const DenoiserConfig& denoiser_config) {
  Model m{encoder_config, denoiser_config, params.with_prefix("encoder."), params.with_prefix("denoiser."),
          Sentinels::from_params(params)};
  // Shapes must match what the configs would build.
  auto check = [](const ParamSet& expected, const ParamSet& got, const char* what) {
    if (expected.size() != got.size()) {
      throw ShapeError(std::string(what) + " checkpoint has " + std::to_string(got.size()) + " tensors, config expects " +
                       std::to_string(expected.size()));
    }
    for (const auto& [name, t] : expected) {
      if (!got.contains(name) || got.at(name).shape() != t.shape()) {
        throw ShapeError(std::string(what) + " checkpoint entry '" + name + "' missing or mis-shaped");
      }
    }
  };
  check(init_encoder(encoder_config, 0), m.encoder, "encoder");
  check(init_denoiser(denoiser_config, 0), m.denoiser, "denoiser");
  return m;
}

ParamSet Model::params() const {
  ParamSet out = encoder;
  out.merge(denoiser);
  sentinels.store(out);
  return out;
}

void sgd_update(ParamSet& params, const ParamSet& grads, OptimizerState& state, double learning_rate,
                double momentum) {
  for (const auto& [name, g] : grads) {
    const Tensor& p = params.at(name);
    if (p.shape() != g.shape()) {
      throw ShapeError("sgd_update: gradient " + shape_string(g.shape()) + " for '" + name + "' of shape " +
                       shape_string(p.shape()));
    }
    Tensor v = state.velocity.contains(name) ? state.velocity.at(name) : Tensor(p.shape());
    if (v.shape() != p.shape()) throw ShapeError("sgd_update: velocity shape mismatch for '" + name + "'");
    Tensor next = p;
    {
      auto vd = v.mutable_data();
      auto pd = next.mutable_data();
      auto gd = g.data();
      for (std::size_t i = 0; i < vd.size(); ++i) {
        vd[i] = momentum * vd[i] + gd[i];
        pd[i] -= learning_rate * vd[i];
      }
    }
    state.velocity.set(name, std::move(v));
    params.set(name, std::move(next));
  }
}

RngStream sample_stream(std::uint64_t seed, std::uint64_t step, std::uint64_t sample_key) {
  return RngStream(seed, 0x5a3b1e).split(step).split(sample_key);
}

namespace {

void accumulate(ParamSet& acc, const ParamSet& g) {
  for (const auto& [name, t] : g) {
    if (!acc.contains(name)) {
      acc.set(name, t);
      continue;
    }
    Tensor sum = acc.at(name);
    auto s = sum.mutable_data();
    auto d = t.data();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += d[i];
    acc.set(name, std::move(sum));
  }
}

enum class Trainable { None, Encoder, Denoiser };

StepResult run_batch(const StepInputs& batch, const Model& model, const NoiseSchedule& sched,
                     const RecapStrategy& recap, Trainable trainable, std::size_t states_per_image,
                     std::uint64_t seed, std::uint64_t step) {
  if (batch.images.size() != batch.keys.size()) throw ShapeError("train_step: image and key counts differ");
  if (!batch.cached_tokens.empty() && batch.cached_tokens.size() != batch.images.size()) {
    throw ShapeError("train_step: cached token count differs from batch size");
  }
  if (batch.images.empty()) throw RangeError("train_step: empty batch");
  if (states_per_image < 1) throw RangeError("states_per_image must be at least 1");
  if (trainable == Trainable::Encoder && !batch.cached_tokens.empty()) {
    throw Error("train_step: cached encoder outputs cannot be used while tuning the encoder");
  }

  const double weight = 1.0 / double(batch.images.size() * states_per_image);
  StepResult result;
  for (std::size_t i = 0; i < batch.images.size(); ++i) {
    const Image& image = batch.images[i];
    RngStream rng = sample_stream(seed, step, batch.keys[i]);
    Tape tape;
    BoundParams den(tape, model.denoiser, trainable == Trainable::Denoiser);

    std::optional<TokenSequence> ts;
    std::optional<BoundParams> enc;
    if (batch.cached_tokens.empty()) {
      enc.emplace(tape, model.encoder, trainable == Trainable::Encoder);
      ts.emplace(encode(image, *enc, model.encoder_config));
    } else {
      ts.emplace(tape.constant(batch.cached_tokens[i]));
    }
    Condition cond = build_condition(*ts, recap, rng, model.sentinels);

    Var total;
    for (std::size_t n = 0; n < states_per_image; ++n) {
      std::size_t t = std::size_t(rng.uniform_int(1, sched.timesteps()));
      Tensor eps = sample_gaussian(image.tensor().shape(), rng);
      Tensor x_t = forward_diffuse(image.tensor(), t, eps, sched);
      Var loss = diffusion_loss(denoise(x_t, t, cond, den, model.denoiser_config), eps);
      total = n == 0 ? loss : add(total, loss);
      ++result.state_draws;
    }
    Var weighted = scale(total, weight);
    result.loss += weighted.value().item();
    result.rng_words += rng.draws();

    if (trainable != Trainable::None) {
      Gradients grads = tape.backward(weighted);
      accumulate(result.gradients, trainable == Trainable::Encoder ? enc->gradients(grads) : den.gradients(grads));
    }
  }
  return result;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng = RngStream(seed, 0xe90c4).split(epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[std::size_t(rng.uniform_int(0, i - 1))]);
  return order;
}

}  // namespace

StepResult train_step(const StepInputs& batch, const Model& model, const NoiseSchedule& sched,
                      const RecapStrategy& recap, Phase phase, std::size_t states_per_image, std::uint64_t seed,
                      std::uint64_t step) {
  return run_batch(batch, model, sched, recap, phase == Phase::B ? Trainable::Encoder : Trainable::Denoiser,
                   states_per_image, seed, step);
}

double batch_loss(const StepInputs& batch, const Model& model, const NoiseSchedule& sched,
                  const RecapStrategy& recap, std::size_t states_per_image, std::uint64_t seed, std::uint64_t step) {
  return run_batch(batch, model, sched, recap, Trainable::None, states_per_image, seed, step).loss;
}

RunResult run_training(const TrainConfig& config, Model model, const std::vector<Image>& dataset,
                       const StepCallback& on_step) {
  config.validate();
  if (dataset.empty() && config.steps > 0) throw RangeError("run_training: empty dataset");
  NoiseSchedule sched = config.schedule();

  // The encoder is frozen in Phase A, so its outputs are computed once.
  std::vector<Tensor> cache;
  if (config.phase == Phase::A && config.steps > 0) {
    cache.reserve(dataset.size());
    for (const auto& img : dataset) {
      Tape tape;
      BoundParams enc(tape, model.encoder, false);
      cache.push_back(encode(img, enc, model.encoder_config).tokens().value());
    }
  }

  OptimizerState opt;
  RunResult out;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::uint64_t epoch = 0;
  std::vector<Image> images;
  std::vector<std::uint64_t> keys;
  std::vector<Tensor> tokens;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    images.clear();
    keys.clear();
    tokens.clear();
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        order = epoch_order(dataset.size(), config.seed, epoch++);
        cursor = 0;
      }
      std::size_t idx = order[cursor++];
      images.push_back(dataset[idx]);
      keys.push_back(idx);
      if (!cache.empty()) tokens.push_back(cache[idx]);
    }
    StepResult r = train_step({images, keys, tokens}, model, sched, config.recap, config.phase,
                              config.states_per_image, config.seed, step);
    ParamSet& trained = config.phase == Phase::B ? model.encoder : model.denoiser;
    sgd_update(trained, r.gradients, opt, config.learning_rate, config.momentum);
    MetricRow row{step, config.phase, r.loss, config.learning_rate};
    out.metrics.push_back(row);
    if (on_step) on_step(row, model);
  }
  out.model = std::move(model);
  return out;
}

RunResult pretrain_denoiser(const TrainConfig& config, Model model, const std::vector<Image>& dataset,
                            const StepCallback& on_step) {
  if (config.phase != Phase::A) throw Error("pretrain_denoiser requires a Phase-A config");
  return run_training(config, std::move(model), dataset, on_step);
}

double probe_loss(const Model& model, const std::vector<Image>& images, const NoiseSchedule& sched,
                  const RecapStrategy& recap, std::size_t states_per_image, std::uint64_t seed) {
  std::vector<std::uint64_t> keys(images.size());
  std::iota(keys.begin(), keys.end(), std::uint64_t{0});
  return batch_loss({images, keys}, model, sched, recap, states_per_image, seed ^ 0x9806e, 0);
}

GradCheckResult check_phase_b_gradients(const Model& model, const std::vector<Image>& images,
                                        const NoiseSchedule& sched, const RecapStrategy& recap,
                                        std::size_t states_per_image, std::size_t samples, std::uint64_t seed,
                                        double h, double abs_floor) {
  std::vector<std::uint64_t> keys(images.size());
  std::iota(keys.begin(), keys.end(), std::uint64_t{0});
  StepInputs batch{images, keys};
  StepResult analytic = train_step(batch, model, sched, recap, Phase::B, states_per_image, seed, 1);

  std::vector<std::pair<std::string, std::size_t>> entries;
  for (const auto& [name, t] : model.encoder) entries.emplace_back(name, t.size());
  std::size_t total = model.encoder.scalar_count();

  if (samples > total) throw RangeError("check_phase_b_gradients: more samples than encoder entries");
  RngStream pick(seed, 0x9c4ec);
  std::vector<std::size_t> chosen;
  while (chosen.size() < samples) {
    auto flat = std::size_t(pick.uniform_int(0, total - 1));
    if (std::find(chosen.begin(), chosen.end(), flat) == chosen.end()) chosen.push_back(flat);
  }
  GradCheckResult result;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t flat = chosen[s];
    std::size_t e = 0;
    while (flat >= entries[e].second) flat -= entries[e++].second;
    const std::string& name = entries[e].first;

    auto loss_at = [&](double delta) {
      Model perturbed = model;
      Tensor p = perturbed.encoder.at(name);
      p.mutable_data()[flat] += delta;
      perturbed.encoder.set(name, std::move(p));
      return batch_loss(batch, perturbed, sched, recap, states_per_image, seed, 1);
    };
    double numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
    double a = analytic.gradients.at(name)[flat];
    double err = relative_error(a, numeric, abs_floor);
    if (result.checked == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = s;
      result.analytic = a;
      result.numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

double mean_loss(const std::vector<MetricRow>& metrics, std::size_t begin, std::size_t end) {
  if (begin >= end || end > metrics.size()) throw RangeError("mean_loss: bad range");
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) total += metrics[i].loss;
  return total / double(end - begin);
}

}  // namespace diva
