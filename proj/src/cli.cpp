// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "diva/checkpoint.hpp"
#include "diva/config.hpp"
#include "diva/corpus.hpp"
#include "diva/gradsuite.hpp"

namespace diva {

namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Streams metric rows to `<path>.tmp` and renames on close, so the final
/// file only ever appears complete.
class MetricsWriter {
 public:
  explicit MetricsWriter(fs::path path) : path_(std::move(path)), tmp_(path_) {
    tmp_ += ".tmp";
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open '" + tmp_.string() + "' for writing");
    out_ << metrics_csv_header();
  }

  void write(const MetricRow& row) {
    out_ << metrics_csv_row(row);
    out_.flush();
  }

  void commit() {
    out_.close();
    if (!out_) throw IoError("write to '" + tmp_.string() + "' failed");
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw IoError("cannot rename '" + tmp_.string() + "': " + ec.message());
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
};

struct Options {
  std::string config_path;
  std::string denoiser_path;
  std::string checkpoint_path;
  std::string out_dir;
  std::string densities = "class,0.15,0.3,0.5,all";
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const Options& opt) {
  RunConfig config = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
  if (opt.seed) config.seed = *opt.seed;
  config.resolve();
  return config;
}

void echo_config(const RunConfig& config, const std::string& command) {
  fs::create_directories(config.output_dir);
  write_file_atomic(config.output_dir / (command + ".ini"), format_run_config(config));
}

int cmd_gen_data(const Options& opt, std::ostream& out) {
  RunConfig config = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  config.output_dir = opt.out_dir;
  if (opt.seed) config.dataset_seed = *opt.seed;
  config.resolve();
  Corpus corpus = generate_corpus(config);
  export_corpus(corpus, config.output_dir);
  echo_config(config, "gen-data");
  out << "wrote " << corpus.train.size() << " training images, " << corpus.pairs.size() << " pairs, "
      << corpus.labeled.size() << " labeled images to " << config.output_dir.string() << '\n';
  return 0;
}

RunResult train_with_metrics(const TrainConfig& tc, Model model, const std::vector<Image>& images,
                             const fs::path& metrics_path) {
  MetricsWriter metrics(metrics_path);
  auto on_step = [&](const MetricRow& row, const Model&) { metrics.write(row); };
  RunResult r = tc.phase == Phase::A ? pretrain_denoiser(tc, std::move(model), images, on_step)
                                     : run_training(tc, std::move(model), images, on_step);
  metrics.commit();
  return r;
}

int cmd_pretrain(const Options& opt, std::ostream& out) {
  RunConfig config = load_config(opt);
  echo_config(config, "pretrain");
  Corpus corpus = load_corpus(config);
  Model model = Model::init(config.encoder, config.denoiser, config.seed);
  RunResult r = train_with_metrics(config.phase_a(), std::move(model), corpus.train_images(),
                                   config.output_dir / "pretrain_metrics.csv");
  auto path = config.output_dir / "pretrain.ckpt";
  write_checkpoint(path, r.model.params());
  out << "phase A: " << r.metrics.size() << " steps";
  if (!r.metrics.empty()) out << ", final loss " << r.metrics.back().loss;
  out << "; checkpoint " << path.string() << '\n';
  return 0;
}

int cmd_tune(const Options& opt, std::ostream& out) {
  RunConfig config = load_config(opt);
  echo_config(config, "tune");
  Model model = Model::from_params(read_checkpoint(opt.denoiser_path), config.encoder, config.denoiser);
  Corpus corpus = load_corpus(config);
  ParamSet frozen = model.denoiser;
  RunResult r = train_with_metrics(config.phase_b(), std::move(model), corpus.train_images(),
                                   config.output_dir / "tune_metrics.csv");
  if (!r.model.denoiser.bit_equal(frozen)) throw Error("tune: denoiser parameters changed during phase B");
  auto path = config.output_dir / "tuned.ckpt";
  write_checkpoint(path, r.model.params());
  out << "phase B: " << r.metrics.size() << " steps";
  if (!r.metrics.empty()) out << ", final loss " << r.metrics.back().loss;
  out << "; checkpoint " << path.string() << '\n';
  return 0;
}

struct EvalSummary {
  double separation;
  std::array<double, 5> by_pattern;
  double knn;
  double consistency;
};

EvalSummary evaluate(const ParamSet& encoder, const RunConfig& config, const Corpus& corpus) {
  EvalSummary s;
  s.separation = synth::pair_separation(encoder, config.encoder, corpus.pairs);
  s.by_pattern = synth::pair_separation_by_pattern(encoder, config.encoder, corpus.pairs);
  s.knn = synth::knn_retention(encoder, config.encoder, corpus.labeled, config.knn_k);
  std::vector<synth::Raster> rasters;
  for (std::size_t i = 0; i < std::min(config.consistency_images, corpus.labeled.size()); ++i) {
    rasters.push_back(corpus.labeled[i].raster);
  }
  RngStream rng(config.dataset_seed, 0xa06);
  s.consistency = rasters.empty() ? 1.0 : synth::augmentation_consistency(encoder, config.encoder, rasters, rng);
  return s;
}

int cmd_eval(const Options& opt, std::ostream& out) {
  RunConfig config = load_config(opt);
  echo_config(config, "eval");
  Model model = Model::from_params(read_checkpoint(opt.checkpoint_path), config.encoder, config.denoiser);
  Corpus corpus = load_corpus(config);
  EvalSummary s = evaluate(model.encoder, config, corpus);
  std::ostringstream row;
  row << opt.checkpoint_path << ',' << shortest(s.separation);
  for (double v : s.by_pattern) row << ',' << shortest(v);
  row << ',' << shortest(s.knn) << ',' << shortest(s.consistency) << '\n';
  std::string header = "checkpoint,pair_separation";
  for (auto p : synth::kAllPatterns) header += "," + std::string(synth::pattern_name(p));
  header += ",knn_accuracy,augmentation_consistency\n";
  out << header << row.str();
  auto stem = fs::path(opt.checkpoint_path).stem().string();
  write_file_atomic(config.output_dir / ("eval_" + stem + ".csv"), header + row.str());
  return 0;
}

int cmd_gradcheck(const Options& opt, std::ostream& out) {
  RunConfig config = load_config(opt);
  echo_config(config, "gradcheck");
  constexpr double kPrimitiveTol = 1e-6;
  constexpr double kEndToEndTol = 1e-4;
  bool ok = true;
  double worst = 0.0;
  for (const auto& c : primitive_gradcheck_suite(config.seed)) {
    bool pass = c.result.max_rel_error < kPrimitiveTol;
    ok = ok && pass;
    worst = std::max(worst, c.result.max_rel_error);
    out << (pass ? "ok   " : "FAIL ") << c.name << " max_rel_error=" << c.result.max_rel_error << '\n';
  }
  GradCheckResult e2e = end_to_end_gradcheck(64, config.seed);
  bool pass = e2e.max_rel_error < kEndToEndTol;
  ok = ok && pass;
  worst = std::max(worst, e2e.max_rel_error);
  out << (pass ? "ok   " : "FAIL ") << "phase_b_loss(" << e2e.checked
      << " encoder entries) max_rel_error=" << e2e.max_rel_error << '\n';
  out << "max relative error: " << worst << '\n';
  return ok ? 0 : 1;
}

int cmd_ablate(const Options& opt, std::ostream& out) {
  RunConfig config = load_config(opt);
  echo_config(config, "ablate");
  std::vector<RecapStrategy> strategies;
  std::stringstream list(opt.densities);
  std::string item;
  while (std::getline(list, item, ',')) strategies.push_back(RecapStrategy::parse(item));
  if (strategies.empty()) throw RangeError("ablate: empty --densities list");

  Corpus corpus = load_corpus(config);
  auto images = corpus.train_images();
  std::vector<Image> probe(images.begin(), images.begin() + std::ptrdiff_t(std::min<std::size_t>(64, images.size())));
  Model init = Model::init(config.encoder, config.denoiser, config.seed);
  double sep_pre = synth::pair_separation(init.encoder, config.encoder, corpus.pairs);

  std::string table = "strategy,density,phase_a_final_loss,probe_loss,phase_b_final_loss,sep_pre,sep_post\n";
  out << table;
  for (const auto& s : strategies) {
    RunConfig rc = config;
    rc.recap = s;
    TrainConfig a = rc.phase_a();
    RunResult ra = pretrain_denoiser(a, init, images);
    double a_loss = ra.metrics.empty() ? 0.0
                                       : mean_loss(ra.metrics, ra.metrics.size() - std::min<std::size_t>(50, ra.metrics.size()),
                                                   ra.metrics.size());
    double probe_l = probe_loss(ra.model, probe, a.schedule(), s, config.states_per_image, config.seed);
    RunResult rb = run_training(rc.phase_b(), ra.model, images);
    double b_loss = rb.metrics.empty() ? 0.0
                                       : mean_loss(rb.metrics, rb.metrics.size() - std::min<std::size_t>(50, rb.metrics.size()),
                                                   rb.metrics.size());
    double sep_post = synth::pair_separation(rb.model.encoder, config.encoder, corpus.pairs);
    std::string row = s.name() + ',' + shortest(expected_density(s, config.encoder.num_patches())) + ',' +
                      shortest(a_loss) + ',' + shortest(probe_l) + ',' + shortest(b_loss) + ',' + shortest(sep_pre) +
                      ',' + shortest(sep_post) + '\n';
    out << row << std::flush;
    table += row;
  }
  write_file_atomic(config.output_dir / "ablation.csv", table);
  return 0;
}

}  // namespace

std::string metrics_csv_header() { return "step,phase,loss,lr\n"; }

std::string metrics_csv_row(const MetricRow& row) {
  return std::to_string(row.step) + ',' + std::string(phase_name(row.phase)) + ',' + shortest(row.loss) + ',' +
         shortest(row.lr) + '\n';
}

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion-feedback tuning of a small vision encoder", argv.empty() ? "diva" : argv.front()};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Overrides the configured seed");
  };

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic corpus as PPM files plus manifest.csv");
  add_common(gen);
  gen->add_option("--out", opt.out_dir, "Output directory")->required();

  auto* pretrain = app.add_subcommand("pretrain", "Phase A: train the denoiser against the frozen initial encoder");
  add_common(pretrain);
  pretrain->add_option("--out", opt.out_dir, "Overrides output.dir");

  auto* tune = app.add_subcommand("tune", "Phase B: tune the encoder against a frozen denoiser");
  add_common(tune);
  tune->add_option("--denoiser", opt.denoiser_path, "Phase-A checkpoint")->required()->check(CLI::ExistingFile);
  tune->add_option("--out", opt.out_dir, "Overrides output.dir");

  auto* eval = app.add_subcommand("eval", "Print pair separation, kNN retention and jitter consistency");
  add_common(eval);
  eval->add_option("--checkpoint", opt.checkpoint_path, "Checkpoint to evaluate")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", opt.out_dir, "Overrides output.dir");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference checks of every primitive and the phase-B loss");
  add_common(grad);
  grad->add_option("--out", opt.out_dir, "Overrides output.dir");

  auto* ablate = app.add_subcommand("ablate", "Sweep recap strategies through phase A and phase B");
  add_common(ablate);
  ablate->add_option("--densities", opt.densities, "Comma-separated strategies: class, all, a probability, poolK");
  ablate->add_option("--out", opt.out_dir, "Overrides output.dir");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (gen->parsed()) return cmd_gen_data(opt, out);
    if (pretrain->parsed()) return cmd_pretrain(opt, out);
    if (tune->parsed()) return cmd_tune(opt, out);
    if (eval->parsed()) return cmd_eval(opt, out);
    if (grad->parsed()) return cmd_gradcheck(opt, out);
    if (ablate->parsed()) return cmd_ablate(opt, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace diva
