// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "soiv/generate.hpp"

namespace soiv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "soiv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("soiv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("relu.nnet", serialize_nnet(testing::one_relu_net()));
    write("sat.query.json",
          R"({"input_box":[[-1,1]],"output_constraints":[{"coeffs":{"y0":1},"sense":">=","bound":0.5}]})");
    write("unsat.query.json",
          R"({"input_box":[[-1,1]],"output_constraints":[{"coeffs":{"y0":1},"sense":"<=","bound":-0.1}]})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, VerifyExitCodesAndRecord) {
  const CliRun u = run({"verify", "--network", path("relu.nnet"), "--query", path("unsat.query.json"),
                     "--seed", "1"});
  EXPECT_EQ(u.code, 20);
  const json ru = json::parse(u.out);
  EXPECT_EQ(ru["verdict"], "unsat");
  EXPECT_EQ(ru["instance"], "unsat");
  EXPECT_TRUE(ru["witness"].is_null());
  EXPECT_TRUE(ru.contains("wall_time_s"));

  const CliRun s = run({"verify", "--network", path("relu.nnet"), "--query", path("sat.query.json"),
                     "--seed", "1"});
  EXPECT_EQ(s.code, 10);
  const json rs = json::parse(s.out);
  EXPECT_EQ(rs["verdict"], "sat");
  ASSERT_EQ(rs["witness"].size(), 1u);
  EXPECT_GE(rs["witness"][0].get<double>(), 0.5 - 1e-9);
  for (const char* k : {"nodes", "proposals", "lp_pivots"}) EXPECT_TRUE(rs["stats"].contains(k));
  for (const char* k : {"strategy", "heuristic", "T", "beta", "gamma", "seed", "static_depth"}) {
    EXPECT_TRUE(rs["config"].contains(k)) << k;
  }
  EXPECT_EQ(rs["config"]["T"], 2);
  EXPECT_EQ(rs["config"]["beta"], 10.0);
  EXPECT_EQ(rs["config"]["gamma"], 0.5);
  EXPECT_EQ(rs["config"]["static_depth"], 3);
}

TEST_F(CliTest, VerifyDeterministicWithoutTiming) {
  const std::vector<std::string> args{"verify", "--network", path("relu.nnet"), "--query",
                                      path("sat.query.json"), "--seed", "7", "--no-timing"};
  const CliRun a = run(args), b = run(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(json::parse(a.out).contains("wall_time_s"));
}

TEST_F(CliTest, UnsetSeedIsPrinted) {
  const CliRun r = run({"verify", "--network", path("relu.nnet"), "--query", path("sat.query.json")});
  EXPECT_EQ(r.code, 10);
  EXPECT_NE(r.err.find("seed: "), std::string::npos);
  const std::string printed = r.err.substr(r.err.find("seed: ") + 6);
  EXPECT_EQ(std::stoull(printed), json::parse(r.out)["config"]["seed"].get<std::uint64_t>());
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"verify", "--network", path("relu.nnet")}).code, 2);
  EXPECT_EQ(run({"verify", "--network", path("missing.nnet"), "--query", path("sat.query.json")}).code, 2);
  EXPECT_EQ(run({"verify", "--network", path("relu.nnet"), "--query", path("sat.query.json"),
                 "--strategy", "anneal"}).code, 2);
  EXPECT_EQ(run({"verify", "--network", path("relu.nnet"), "--query", path("sat.query.json"),
                 "-T", "0"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, TraceDumpLpAndPortfolio) {
  const CliRun r = run({"verify", "--network", path("relu.nnet"), "--query", path("sat.query.json"),
                     "--seed", "3", "--trace", "--dump-lp", path("root.lp"), "--portfolio", "2"});
  EXPECT_EQ(r.code, 10);
  std::istringstream lines(r.err);
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] != '{') continue;
    const json j = json::parse(line);
    EXPECT_TRUE(j.contains("depth") && j.contains("free_relus") && j.contains("cost_trajectory"));
    ++records;
  }
  EXPECT_GT(records, 0);
  EXPECT_TRUE(fs::exists(path("root.lp")));
  EXPECT_TRUE(json::parse(r.out)["config"].contains("portfolio_winner"));
}

TEST_F(CliTest, BenchRowsAndSummary) {
  fs::create_directories(dir_ / "suite");
  for (const char* name : {"a", "b"}) {
    write(std::string("suite/") + name + ".nnet", serialize_nnet(testing::one_relu_net()));
  }
  fs::copy_file(path("sat.query.json"), path("suite/a.query.json"));
  fs::copy_file(path("unsat.query.json"), path("suite/b.query.json"));
  const CliRun r = run({"bench", "--dir", path("suite"), "--seed", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"instance", "config", "verdict", "wall_time_s",
                                               "nodes", "proposals"}));
  EXPECT_EQ(rows[1][2], "sat");
  EXPECT_EQ(rows[2][2], "unsat");
  EXPECT_EQ(rows[3][0], "SUMMARY");
  EXPECT_EQ(rows[3][2], "2");
  EXPECT_NEAR(std::stod(rows[3][3]), std::stod(rows[1][3]) + std::stod(rows[2][3]), 1e-3);

  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(run({"bench", "--dir", path("empty")}).code, 2);
}

TEST_F(CliTest, BenchSweepSchema) {
  write_suite(path("gen"), robustness_suite(4, 2));
  const CliRun r = run({"bench", "--dir", path("gen"), "--sweep-T", "1,2,3", "--seed", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    labels.push_back(line.substr(0, line.find(',')));
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3) << line;
  }
  EXPECT_EQ(labels, (std::vector<std::string>{"Rejection threshold T", "SAT Solv.", "UNSAT Solv.",
                                              "Avg. time (common)", "Avg. states (common)"}));
}

TEST_F(CliTest, TightenBound) {
  // y0 = 1 - ReLU(x), y1 = ReLU(x) around x0 = 0: counterexamples need x >= 0.5.
  const Network net({testing::make_layer({{1.0}}, {0.0}, Activation::kRelu),
                     testing::make_layer({{-1.0}, {1.0}}, {1.0, 0.0}, Activation::kIdentity)});
  write("toy.nnet", serialize_nnet(net));
  const std::vector<std::string> base{"tighten-bound", "--network", path("toy.nnet"), "--x0", "0",
                                      "--true-label", "0", "--target-label", "1",
                                      "--domain-lo", "-4", "--domain-hi", "4", "--seed", "0"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  // Unsat right away: 0.98 * 0.5 < 0.5.
  const json once = json::parse(with({"--eps0", "0.5"}).out);
  EXPECT_EQ(once["steps"].size(), 1u);
  EXPECT_EQ(once["stop_reason"], "unsat");
  EXPECT_NEAR(once["certified_floor"].get<double>(), 0.49, 1e-12);
  EXPECT_EQ(once["attacked_eps"], 0.5);

  // Sat throughout: k iterations give 1 - 0.98^k.
  const json sat = json::parse(with({"--eps0", "4", "--max-iterations", "5"}).out);
  EXPECT_EQ(sat["stop_reason"], "max_iterations");
  EXPECT_NEAR(sat["reduction_pct"].get<double>(), 100.0 * (1.0 - std::pow(0.98, 5)), 1e-9);

  // Full run from 2 * eps*.
  const json full = json::parse(with({"--eps0", "1.0"}).out);
  EXPECT_EQ(full["stop_reason"], "unsat");
  EXPECT_LE(full["attacked_eps"].get<double>(), 0.5 / 0.98 + 1e-9);
  EXPECT_GE(full["certified_floor"].get<double>(), 0.98 * full["attacked_eps"].get<double>() - 1e-12);

  EXPECT_EQ(with({"--eps0", "0"}).code, 2);
}

TEST_F(CliTest, GenSuite) {
  for (const char* kind : {"robustness", "sat-biased", "toy"}) {
    const std::string out = path(std::string("gen_") + kind);
    const CliRun r = run({"gen-suite", "--out", out, "--kind", kind, "--count", "3", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(out)) n += e.path().extension() == ".nnet";
    EXPECT_EQ(n, 3u);
  }
}

}  // namespace
}  // namespace soiv
