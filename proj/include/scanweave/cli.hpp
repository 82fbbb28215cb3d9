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

/**
 * \file cli.hpp
 * \brief `scanweave` command line: run, simulate, evaluate.
 *
 * Exit codes: 0 success, 1 I/O or data error, 2 usage or configuration error.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "scanweave/odometry.hpp"
#include "scanweave/synthetic_world.hpp"

namespace scanweave::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

struct RunOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  PipelineConfig pipeline;
  bool synth_timestamps = false;
  std::size_t rte_step = 1;
  std::vector<double> lengths = {100, 200, 300, 400, 500, 600, 700, 800};
  bool quiet = false;
  std::uint64_t seed = 0;
};

struct SimulateOptions {
  std::filesystem::path output;
  std::string world = "street";  // street | block
  TrajectoryParams trajectory;
  SensorParams sensor;
  std::uint64_t seed = 0;
};

struct EvaluateOptions {
  std::filesystem::path estimate;
  std::filesystem::path ground_truth;
  std::filesystem::path output;  // optional directory for rte.json / rte.txt
  std::vector<double> lengths = {100, 200, 300, 400, 500, 600, 700, 800};
  std::size_t rte_step = 1;
  std::string sequence = "seq";
};

int cmd_run(const RunOptions &opts, std::ostream &out, std::ostream &err);
int cmd_simulate(const SimulateOptions &opts, std::ostream &out, std::ostream &err);
int cmd_evaluate(const EvaluateOptions &opts, std::ostream &out, std::ostream &err);

/// Parses `key=value` lines; `#` starts a comment. Keys are flag names without dashes.
std::map<std::string, std::string> parse_config_text(const std::string &text);

/// Entry point; args[0] is the program name.
int main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace scanweave::cli
