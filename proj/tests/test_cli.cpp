// Copyright 2026, scanweave contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "scanweave/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "scanweave/dataset_io.hpp"
#include "test_util.hpp"

using namespace scanweave;
using scanweave::testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "scanweave");
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

// Small, fast sequence: 10 frames of a coarse sensor.
std::vector<std::string> small_simulate(const std::filesystem::path &dir) {
  return {"simulate", "-o", dir.string(), "--frames", "10", "--rings", "32", "--azimuth-steps", "360",
          "--max-range", "60", "--seed", "3"};
}

std::size_t count_lines(const std::string &s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST(Cli, RunProducesOneRowPerScan) {
  TempDir tmp("cli_run");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "seq")).code, 0);
  const Outcome r = invoke({"run", "-i", (tmp.path() / "seq").string(), "-o", (tmp.path() / "out").string(),
                            "--max-range", "60", "--lengths", "5,10", "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string traj = load_text(tmp.path() / "out" / "trajectory.txt");
  EXPECT_EQ(count_lines(traj), 10u);
  EXPECT_EQ(read_trajectory(traj).size(), 10u);

  const auto report = nlohmann::json::parse(load_text(tmp.path() / "out" / "report.json"));
  EXPECT_EQ(report["frames_processed"].get<std::size_t>(), 10u);
  EXPECT_EQ(report["frames"].size(), 10u);
  EXPECT_TRUE(report["config"]["gamma_derived"].get<bool>());
  EXPECT_DOUBLE_EQ(report["config"]["gamma"].get<double>(), 20.0);
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "out" / "rte.json"));
  EXPECT_NE(r.out.find("avg"), std::string::npos);
}

TEST(Cli, ExplicitGammaIsEchoed) {
  TempDir tmp("cli_gamma");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "seq")).code, 0);
  ASSERT_EQ(invoke({"run", "-i", (tmp.path() / "seq").string(), "-o", (tmp.path() / "out").string(), "--gamma",
                    "12.5", "--seed", "9", "-q"})
                .code,
            0);
  const auto report = nlohmann::json::parse(load_text(tmp.path() / "out" / "report.json"));
  EXPECT_FALSE(report["config"]["gamma_derived"].get<bool>());
  EXPECT_DOUBLE_EQ(report["config"]["gamma"].get<double>(), 12.5);
  EXPECT_EQ(report["seed"].get<std::uint64_t>(), 9u);
}

TEST(Cli, InvalidConfigExitsTwo) {
  TempDir tmp("cli_bad");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "seq")).code, 0);
  const std::string in = (tmp.path() / "seq").string();
  const std::string out = (tmp.path() / "out").string();
  EXPECT_EQ(invoke({"run", "-i", in, "-o", out, "--v-map", "2", "--v-icp", "1"}).code, 2);
  EXPECT_EQ(invoke({"run", "-i", in, "-o", out, "--tau", "0"}).code, 2);
  EXPECT_EQ(invoke({"run", "-i", in, "-o", out, "--rte-step", "0"}).code, 2);
  EXPECT_EQ(invoke({"run", "-i", in, "-o", out, "--no-such-flag"}).code, 2);
  EXPECT_EQ(invoke({"simulate", "-o", out, "--world", "moon"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_FALSE(std::filesystem::exists(tmp.path() / "out" / "trajectory.txt"));
}

TEST(Cli, MissingInputExitsOne) {
  TempDir tmp("cli_missing");
  EXPECT_EQ(invoke({"run", "-i", (tmp.path() / "nope").string(), "-o", (tmp.path() / "out").string()}).code, 1);
}

TEST(Cli, SimulateIsByteDeterministic) {
  TempDir tmp("cli_sim");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "a")).code, 0);
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "b")).code, 0);
  std::size_t files = 0;
  for (const auto &e : std::filesystem::directory_iterator(tmp.path() / "a")) {
    ++files;
    EXPECT_EQ(load_text(e.path()), load_text(tmp.path() / "b" / e.path().filename())) << e.path();
  }
  EXPECT_EQ(files, 11u);  // 10 scans plus poses.txt
}

TEST(Cli, EvaluateSelfIsZero) {
  TempDir tmp("cli_eval");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "seq")).code, 0);
  const std::string gt = (tmp.path() / "seq" / "poses.txt").string();
  const Outcome r = invoke({"evaluate", "-e", gt, "-g", gt, "--lengths", "0.5,1", "-o", (tmp.path() / "ev").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(load_text(tmp.path() / "ev" / "rte.json"));
  EXPECT_FALSE(j["empty"].get<bool>());
  EXPECT_EQ(j["translation_error_pct"].get<double>(), 0.0);
  EXPECT_EQ(load_text(tmp.path() / "ev" / "rte.txt"), r.out);
}

TEST(Cli, EvaluateRowMismatchIsDataError) {
  TempDir tmp("cli_mismatch");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "seq")).code, 0);
  const std::string gt_text = load_text(tmp.path() / "seq" / "poses.txt");
  save_text(tmp.path() / "short.txt", gt_text.substr(0, gt_text.rfind('\n', gt_text.size() - 2) + 1));
  const Outcome r = invoke({"evaluate", "-e", (tmp.path() / "short.txt").string(), "-g",
                            (tmp.path() / "seq" / "poses.txt").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ConfigFilePrecedence) {
  TempDir tmp("cli_cfg");
  ASSERT_EQ(invoke(small_simulate(tmp.path() / "seq")).code, 0);
  save_text(tmp.path() / "cfg.txt", "# test config\nkappa = 4\nd_max = 2.5\nlm-iters=7\n");
  ASSERT_EQ(invoke({"run", "-i", (tmp.path() / "seq").string(), "-o", (tmp.path() / "out").string(), "--config",
                    (tmp.path() / "cfg.txt").string(), "--kappa", "5", "-q"})
                .code,
            0);
  const auto cfg = nlohmann::json::parse(load_text(tmp.path() / "out" / "report.json"))["config"];
  EXPECT_DOUBLE_EQ(cfg["kappa"].get<double>(), 5.0);  // flag beats file
  EXPECT_DOUBLE_EQ(cfg["d_max"].get<double>(), 2.5);  // file beats default
  EXPECT_EQ(cfg["lm_iters"].get<int>(), 7);
  EXPECT_DOUBLE_EQ(cfg["tau"].get<double>(), 1.0 / 3.0);  // default

  save_text(tmp.path() / "bad.txt", "kapa = 4\n");
  EXPECT_EQ(invoke({"run", "-i", (tmp.path() / "seq").string(), "-o", (tmp.path() / "out2").string(), "--config",
                    (tmp.path() / "bad.txt").string()})
                .code,
            2);
}

TEST(Cli, ParseConfigText) {
  const auto m = cli::parse_config_text("[pipeline]\n v_map = 0.5 # voxel\n\ngamma=\"10\"\n");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("v-map"), "0.5");
  EXPECT_EQ(m.at("gamma"), "10");
}
