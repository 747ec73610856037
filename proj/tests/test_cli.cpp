// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_config.hpp"
#include "ctqw/dataset.hpp"
#include "ctqw/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctqw;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ctqw");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

Graph plain(std::size_t n, std::vector<Edge> edges, std::size_t label = 0) {
  Graph g;
  g.node_count = n;
  g.feature_dim = 1;
  g.features.assign(n, 1.0);
  g.edges = normalize_edges(std::move(edges));
  g.label = label;
  return g;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ctqw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);

    Dataset path2{"path2", {plain(2, {{0, 1}}, 0), plain(2, {{0, 1}}, 1)}, 2, 1};
    write_fixture(dir_ / "path2.txt", path2);
    Dataset edgeless{"edgeless", {plain(3, {}, 0), plain(3, {}, 1)}, 2, 1};
    write_fixture(dir_ / "edgeless.txt", edgeless);
    write_fixture(dir_ / "toy.txt", synthetic_dataset(18, 4, 6, 3));
    write_config("tiny.json", {{"model", {{"L", 1}, {"T", 2}, {"h", 8}, {"heads", 2}}},
                               {"train", {{"epochs", 2}, {"patience", 2}, {"folds", 3}, {"batch_size", 4}}}});
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const json& doc) {
    std::ofstream(dir_ / name) << doc.dump(2);
    return (dir_ / name).string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string out_dir() const { return (dir_ / "out").string(); }

  fs::path dir_;
};

TEST_F(Cli, HelpAndMissingSubcommand) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitConfig);
}

TEST_F(Cli, UnknownConfigKeyIsNamed) {
  const auto cfg = write_config("bad.json", {{"model", {{"L", 2}, {"depth", 3}}}});
  const Result r = invoke({"--config", cfg, "--fixture", path("toy.txt"), "cv"});
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_NE(r.err.find("model.depth"), std::string::npos) << r.err;

  const auto top = write_config("top.json", {{"optimizer", "sgd"}});
  const Result t = invoke({"--config", top, "--fixture", path("toy.txt"), "cv"});
  EXPECT_EQ(t.code, cli::kExitConfig);
  EXPECT_NE(t.err.find("optimizer"), std::string::npos);
}

TEST_F(Cli, WrongTypeAndInvalidValues) {
  EXPECT_EQ(invoke({"--config", write_config("a.json", {{"train", {{"lr", "fast"}}}}), "--fixture",
                    path("toy.txt"), "cv"})
                .code,
            cli::kExitConfig);
  EXPECT_EQ(invoke({"--config", write_config("b.json", {{"model", {{"h", 10}, {"heads", 4}}}}),
                    "--fixture", path("toy.txt"), "cv"})
                .code,
            cli::kExitConfig);
  EXPECT_EQ(invoke({"--config", path("nope.json"), "cv"}).code, cli::kExitConfig);
}

TEST_F(Cli, MissingDatasetExitsTwoAndWritesNothing) {
  const Result r = invoke({"--dataset-root", path("no_such_root"), "--out", out_dir(), "cv"});
  EXPECT_EQ(r.code, cli::kExitDataset);
  EXPECT_NE(r.err.find("MUTAG"), std::string::npos);
  EXPECT_FALSE(fs::exists(out_dir()));
  EXPECT_EQ(invoke({"--fixture", path("missing.txt"), "simulate"}).code, cli::kExitDataset);
}

TEST_F(Cli, SimulatePathMatchesCosineSquared) {
  const Result r = invoke({"--fixture", path("path2.txt"), "--out", out_dir(), "simulate", "--T", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(fs::path(out_dir()) / "simulate_path2_g0.csv");
  EXPECT_EQ(line_count(csv), 1 + 4 * 2 * 2);
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "t,i,j,p");
  bool seen = false;
  while (std::getline(rows, line)) {
    double t, p;
    std::size_t i, j;
    char c;
    std::istringstream f(line);
    f >> t >> c >> i >> c >> j >> c >> p;
    const double expect = i == j ? std::cos(t) * std::cos(t) : std::sin(t) * std::sin(t);
    EXPECT_NEAR(p, expect, 1e-8) << line;
    if (t == 1.0 && i == 0 && j == 0) {
      EXPECT_NEAR(p, 0.29192658172642888, 1e-8);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
  const json j = json::parse(slurp(fs::path(out_dir()) / "simulate_path2_g0.json"));
  EXPECT_EQ(j["weights"], "unit");
  EXPECT_LE(j["column_sum_max_deviation"].get<double>(), 1e-8);
  EXPECT_LE(j["symmetry_max_deviation"].get<double>(), 1e-8);
  EXPECT_EQ(j["version"], cli::kVersion);
  EXPECT_TRUE(j["resolved_config"].contains("model"));
}

TEST_F(Cli, SimulateEdgelessIsIdentity) {
  ASSERT_EQ(invoke({"--fixture", path("edgeless.txt"), "--out", out_dir(), "simulate", "--graph-index",
                    "1", "--T", "3"})
                .code,
            0);
  std::istringstream rows(slurp(fs::path(out_dir()) / "simulate_edgeless_g1.csv"));
  std::string line;
  std::getline(rows, line);
  std::size_t n = 0;
  while (std::getline(rows, line)) {
    double t, p;
    std::size_t i, j;
    char c;
    std::istringstream(line) >> t >> c >> i >> c >> j >> c >> p;
    EXPECT_EQ(p, i == j ? 1.0 : 0.0) << line;
    ++n;
  }
  EXPECT_EQ(n, 27u);
}

TEST_F(Cli, SimulateAcceptsSingleGraphFixture) {
  Dataset one{"one", {plain(3, {{0, 1}, {1, 2}})}, 1, 1};
  write_fixture(dir_ / "one.txt", one);
  const Result r = invoke({"--fixture", path("one.txt"), "--out", out_dir(), "simulate", "--T", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(invoke({"--fixture", path("one.txt"), "--out", out_dir(), "cv"}).code, cli::kExitDataset);
}

TEST_F(Cli, SimulateRejectsBadIndexAndSteps) {
  EXPECT_EQ(invoke({"--fixture", path("path2.txt"), "--out", out_dir(), "simulate", "--graph-index", "2"}).code,
            cli::kExitConfig);
  EXPECT_EQ(invoke({"--fixture", path("path2.txt"), "--out", out_dir(), "simulate", "--T", "0"}).code,
            cli::kExitConfig);
  EXPECT_FALSE(fs::exists(out_dir()));
}

TEST_F(Cli, CrossValidationWritesResultAndFoldCsv) {
  const Result r = invoke({"--config", path("tiny.json"), "--fixture", path("toy.txt"), "--out",
                           out_dir(), "--seed", "7", "cv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("±"), std::string::npos) << r.out;
  const json j = json::parse(slurp(fs::path(out_dir()) / "cv_toy.json"));
  ASSERT_EQ(j["folds"].size(), 3u);
  EXPECT_EQ(j["ablation"], "none");
  EXPECT_EQ(j["resolved_config"]["train"]["seed"], 7);
  EXPECT_EQ(j["config"]["model"]["h"], 8);
  EXPECT_FALSE(j["config"].contains("output"));
  const auto accs = j["fold_accuracies"].get<std::vector<double>>();
  double mean = 0.0, var = 0.0;
  for (double a : accs) mean += a / accs.size();
  for (double a : accs) var += (a - mean) * (a - mean) / accs.size();
  EXPECT_NEAR(j["mean"].get<double>(), mean, 1e-12);
  EXPECT_NEAR(j["std"].get<double>(), std::sqrt(var), 1e-12);
  EXPECT_EQ(line_count(slurp(fs::path(out_dir()) / "cv_toy_folds.csv")), 4u);
  for (const auto& e : fs::directory_iterator(out_dir())) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
}

TEST_F(Cli, TrainedCheckpointDrivesSimulation) {
  const std::string ckpt = path("ckpt");
  ASSERT_EQ(invoke({"--config", path("tiny.json"), "--fixture", path("toy.txt"), "--out", out_dir(),
                    "cv", "--checkpoint-dir", ckpt})
                .code,
            0);
  ASSERT_TRUE(fs::exists(fs::path(ckpt) / "fold_2.ckpt"));
  const Result r = invoke({"--config", path("tiny.json"), "--fixture", path("toy.txt"), "--out",
                           out_dir(), "simulate", "--checkpoint", (fs::path(ckpt) / "fold_0.ckpt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(fs::path(out_dir()) / "simulate_toy_g0.json"));
  EXPECT_EQ(j["weights"], "checkpoint");
  EXPECT_LE(j["column_sum_max_deviation"].get<double>(), 1e-8);

  // A checkpoint from a different architecture is rejected.
  const auto wide = write_config("wide.json", {{"model", {{"h", 16}, {"heads", 2}, {"L", 1}}}});
  EXPECT_NE(invoke({"--config", wide, "--fixture", path("toy.txt"), "--out", out_dir(), "simulate",
                    "--checkpoint", (fs::path(ckpt) / "fold_0.ckpt").string()})
                .code,
            0);
}

TEST_F(Cli, SweepWritesOneFilePerValueAndCombinedCsv) {
  const Result r = invoke({"--config", path("tiny.json"), "--fixture", path("toy.txt"), "--out",
                           out_dir(), "sweep", "--param", "T", "--values", "1,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(fs::path(out_dir()) / "sweep_toy_T1.json"));
  const json j = json::parse(slurp(fs::path(out_dir()) / "sweep_toy_T2.json"));
  EXPECT_EQ(j["sweep"]["value"], 2);
  EXPECT_EQ(line_count(slurp(fs::path(out_dir()) / "sweep_toy_T.csv")), 3u);
  EXPECT_EQ(invoke({"--fixture", path("toy.txt"), "sweep", "--param", "h", "--values", "2"}).code,
            cli::kExitConfig);
}

TEST_F(Cli, AblationIsFlaggedAndBothOffRejected) {
  const Result r = invoke({"--config", path("tiny.json"), "--fixture", path("toy.txt"), "--out",
                           out_dir(), "ablate", "--which", "no_qwgr"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(fs::path(out_dir()) / "ablate_toy_no_qwgr.json"));
  EXPECT_EQ(j["ablation"], "no_qwgr");
  EXPECT_FALSE(j["resolved_config"]["model"]["use_qwgr"].get<bool>());
  EXPECT_TRUE(j["config"].is_object());

  const auto off = write_config("off.json", {{"model", {{"use_qwgt", false}}}});
  const std::string other = (dir_ / "other").string();
  EXPECT_EQ(invoke({"--config", off, "--fixture", path("toy.txt"), "--out", other, "ablate",
                    "--which", "no_qwgr"})
                .code,
            cli::kExitConfig);
  EXPECT_FALSE(fs::exists(other));
  const auto both = write_config("both.json", {{"model", {{"use_qwgt", false}, {"use_qwgr", false}}}});
  EXPECT_EQ(invoke({"--config", both, "--fixture", path("toy.txt"), "cv"}).code, cli::kExitConfig);
}

TEST_F(Cli, GradcheckPassesAndThresholdZeroFails) {
  const auto small = write_config("small.json", {{"model", {{"L", 1}, {"T", 2}, {"h", 8}, {"heads", 2}}}});
  const Result r = invoke({"--config", small, "gradcheck", "--nodes", "4", "--feature-dim", "3"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  std::size_t listed = 0;
  for (auto pos = r.out.find("\n  "); pos != std::string::npos; pos = r.out.find("\n  ", pos + 1)) ++listed;
  EXPECT_EQ(listed, 5u) << r.out;

  const Result z = invoke({"--config", small, "gradcheck", "--nodes", "4", "--feature-dim", "3",
                           "--threshold", "0"});
  EXPECT_EQ(z.code, cli::kExitNumeric) << z.out;
  EXPECT_NE(z.out.find("FAIL"), std::string::npos);
}

}  // namespace
