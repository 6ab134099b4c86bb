// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "diva/checkpoint.hpp"
#include "diva/cli.hpp"

namespace diva {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "diva");
  std::ostringstream out, err;
  int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

struct Process {
  int code;
  std::string output;
};

Process run_binary(const std::string& args) {
  std::string cmd = std::string(DIVA_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string text;
  char buf[512];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path tiny_config(const fs::path& dir) {
  fs::create_directories(dir);
  fs::path path = dir / "tiny.ini";
  std::ofstream(path) << "[encoder]\npatch_size = 8\nembed_dim = 8\ndepth = 1\nheads = 2\n"
                         "[denoiser]\npatch_size = 8\nembed_dim = 8\ndepth = 1\nheads = 2\ntime_embed_dim = 8\n"
                         "[trainer]\nsteps = 3\nbatch_size = 4\npretrain_steps = 3\n"
                         "[dataset]\ntrain_images = 8\npairs_per_pattern = 2\nlabeled_images = 16\n"
                         "knn_k = 1\nconsistency_images = 4\n";
  return path;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("diva_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
  Outcome o = run({"frobnicate"});
  EXPECT_NE(o.code, 0);
  EXPECT_NE(o.err.find("gen-data"), std::string::npos);
  EXPECT_NE(o.err.find("Usage"), std::string::npos);
}

TEST(Cli, MissingSubcommandFails) { EXPECT_NE(run({}).code, 0); }

TEST(Cli, TuneRequiresDenoiser) {
  Outcome o = run({"tune"});
  EXPECT_NE(o.code, 0);
  EXPECT_NE(o.err.find("--denoiser"), std::string::npos) << o.err;
}

TEST(Cli, BinaryReportsMissingDenoiser) {
  Process p = run_binary("tune");
  EXPECT_NE(p.code, 0);
  EXPECT_NE(p.output.find("--denoiser"), std::string::npos) << p.output;
}

TEST(Cli, GradcheckPasses) {
  fs::path dir = scratch("gradcheck");
  Outcome o = run({"gradcheck", "--out", dir.string()});
  EXPECT_EQ(o.code, 0) << o.out;
  auto at = o.out.find("max relative error: ");
  ASSERT_NE(at, std::string::npos);
  double worst = std::stod(o.out.substr(at + 20));
  EXPECT_LT(worst, 1e-4);
  EXPECT_EQ(o.out.find("FAIL"), std::string::npos);
}

TEST(Cli, BadConfigIsAnError) {
  fs::path dir = scratch("badconfig");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "[trainer]\nsteps = lots\n";
  Outcome o = run({"pretrain", "--config", (dir / "bad.ini").string(), "--out", dir.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("error:"), std::string::npos);
}

TEST(Cli, CorruptCheckpointIsReported) {
  fs::path dir = scratch("corrupt");
  fs::create_directories(dir);
  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  Outcome o = run({"eval", "--config", tiny_config(dir).string(), "--checkpoint", (dir / "junk.ckpt").string(),
                   "--out", dir.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("bad magic"), std::string::npos) << o.err;
}

TEST(Cli, PipelineWritesArtifacts) {
  fs::path dir = scratch("pipeline");
  std::string config = tiny_config(dir).string();
  fs::path data = dir / "data";
  ASSERT_EQ(run({"gen-data", "--config", config, "--out", data.string()}).code, 0);
  EXPECT_TRUE(fs::exists(data / "manifest.csv"));

  fs::path a = dir / "a";
  Outcome pre = run({"pretrain", "--config", config, "--out", a.string()});
  ASSERT_EQ(pre.code, 0) << pre.err;
  EXPECT_TRUE(fs::exists(a / "pretrain.ckpt"));
  EXPECT_TRUE(fs::exists(a / "pretrain.ini"));
  std::string metrics = read_text(a / "pretrain_metrics.csv");
  EXPECT_EQ(metrics.rfind("step,phase,loss,lr\n1,A,", 0), 0u) << metrics;
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 4);

  fs::path b = dir / "b";
  Outcome tune = run({"tune", "--config", config, "--denoiser", (a / "pretrain.ckpt").string(), "--out", b.string()});
  ASSERT_EQ(tune.code, 0) << tune.err;
  ParamSet before = read_checkpoint(a / "pretrain.ckpt");
  ParamSet after = read_checkpoint(b / "tuned.ckpt");
  EXPECT_TRUE(after.with_prefix("denoiser.").bit_equal(before.with_prefix("denoiser.")));
  EXPECT_FALSE(after.with_prefix("encoder.").bit_equal(before.with_prefix("encoder.")));

  Outcome e1 = run({"eval", "--config", config, "--checkpoint", (a / "pretrain.ckpt").string(), "--out", b.string()});
  Outcome e2 = run({"eval", "--config", config, "--checkpoint", (b / "tuned.ckpt").string(), "--out", b.string()});
  ASSERT_EQ(e1.code, 0) << e1.err;
  ASSERT_EQ(e2.code, 0) << e2.err;
  EXPECT_EQ(e1.out.rfind("checkpoint,pair_separation,", 0), 0u);
  EXPECT_EQ(std::count(e2.out.begin(), e2.out.end(), '\n'), 2);
  EXPECT_TRUE(fs::exists(b / "eval_pretrain.csv"));
  EXPECT_TRUE(fs::exists(b / "eval_tuned.csv"));
}

TEST(Cli, SeedOverrideChangesRun) {
  fs::path dir = scratch("seed");
  std::string config = tiny_config(dir).string();
  ASSERT_EQ(run({"pretrain", "--config", config, "--out", (dir / "s0").string()}).code, 0);
  ASSERT_EQ(run({"pretrain", "--config", config, "--seed", "1", "--out", (dir / "s1").string()}).code, 0);
  ASSERT_EQ(run({"pretrain", "--config", config, "--out", (dir / "t0").string()}).code, 0);
  EXPECT_NE(read_text(dir / "s0" / "pretrain.ckpt"), read_text(dir / "s1" / "pretrain.ckpt"));
  EXPECT_EQ(read_text(dir / "s0" / "pretrain.ckpt"), read_text(dir / "t0" / "pretrain.ckpt"));
  EXPECT_NE(read_text(dir / "s1" / "pretrain.ini").find("seed = 1"), std::string::npos);
}

TEST(Cli, AblateWritesTable) {
  fs::path dir = scratch("ablate");
  std::string config = tiny_config(dir).string();
  Outcome o = run({"ablate", "--config", config, "--densities", "class,0.5,all", "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  std::string table = read_text(dir / "ablation.csv");
  EXPECT_EQ(table.rfind("strategy,density,", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
  EXPECT_NE(run({"ablate", "--config", config, "--densities", "half", "--out", dir.string()}).code, 0);
}

}  // namespace
}  // namespace diva
