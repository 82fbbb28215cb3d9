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

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "scanweave/dataset_io.hpp"
#include "scanweave/eval_metrics.hpp"
#include "scanweave/format.hpp"
#include "scanweave/parallel.hpp"

namespace scanweave::cli {

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_lengths(const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const double v = parse_number(tok);
    if (!(v > 0.0)) throw ConfigError("segment lengths must be positive");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("no segment lengths given");
  return out;
}

nlohmann::json config_json(const PipelineConfig &c) {
  return {{"v_map", c.v_map},
          {"v_icp", c.v_icp},
          {"d_max", c.d_max},
          {"tau", c.tau},
          {"conv_eps", c.conv_eps},
          {"max_icp_iters", c.max_icp_iters},
          {"min_corrs", c.min_corrs},
          {"kappa", c.kappa},
          {"gamma", c.effective_gamma()},
          {"gamma_derived", !c.gamma.has_value()},
          {"lm_iters", c.lm_iters},
          {"max_range", c.max_lidar_range}};
}

// Flag values override config-file values, which override built-in defaults.
struct RunFlags {
  std::optional<double> v_map, v_icp, d_max, tau, conv_eps, kappa, gamma, max_range;
  std::optional<int> lm_iters, max_icp_iters;
  std::optional<std::size_t> min_corrs, rte_step;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> lengths;
  bool synth_timestamps = false;
  std::string config_path;
};

template <typename T>
T parse_config_value(const std::string &key, const std::string &value) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      return parse_number(value);
    } else {
      const double v = parse_number(value);
      if (v < 0.0 || v != std::floor(v)) throw std::invalid_argument("not a non-negative integer");
      return static_cast<T>(v);
    }
  } catch (const std::invalid_argument &e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

RunOptions resolve_run(const RunFlags &flags, RunOptions opts) {
  std::map<std::string, std::string> file;
  if (!flags.config_path.empty()) file = parse_config_text(load_text(flags.config_path));

  auto pick = [&]<typename T>(const std::optional<T> &flag, const std::string &key, T &target) {
    if (flag) {
      target = *flag;
    } else if (auto it = file.find(key); it != file.end()) {
      target = parse_config_value<T>(key, it->second);
    }
    file.erase(key);
  };

  PipelineConfig &c = opts.pipeline;
  pick(flags.v_map, "v-map", c.v_map);
  pick(flags.v_icp, "v-icp", c.v_icp);
  pick(flags.d_max, "d-max", c.d_max);
  pick(flags.tau, "tau", c.tau);
  pick(flags.conv_eps, "conv-eps", c.conv_eps);
  pick(flags.kappa, "kappa", c.kappa);
  pick(flags.max_range, "max-range", c.max_lidar_range);
  pick(flags.lm_iters, "lm-iters", c.lm_iters);
  pick(flags.max_icp_iters, "max-icp-iters", c.max_icp_iters);
  pick(flags.min_corrs, "min-corrs", c.min_corrs);
  pick(flags.rte_step, "rte-step", opts.rte_step);
  pick(flags.seed, "seed", opts.seed);
  double gamma = 0.0;
  std::optional<double> none;
  if (flags.gamma || file.contains("gamma")) {
    pick(flags.gamma, "gamma", gamma);
    c.gamma = gamma;
  }
  pick(none, "gamma", gamma);

  if (flags.lengths) {
    opts.lengths = parse_lengths(*flags.lengths);
  } else if (auto it = file.find("lengths"); it != file.end()) {
    opts.lengths = parse_lengths(it->second);
  }
  file.erase("lengths");

  opts.synth_timestamps = flags.synth_timestamps;
  if (auto it = file.find("synth-timestamps"); it != file.end()) {
    if (!flags.synth_timestamps) opts.synth_timestamps = it->second == "true" || it->second == "1";
    file.erase(it);
  }

  if (!file.empty()) throw ConfigError("unknown config key '" + file.begin()->first + "'");
  if (opts.rte_step == 0) throw ConfigError("rte-step must be positive");
  try {
    c.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  return opts;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string &text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    const auto e = s.find_last_not_of(" \t\r\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(ss, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

int cmd_run(const RunOptions &opts, std::ostream &out, std::ostream &err) {
  try {
    opts.pipeline.validate();
  } catch (const std::invalid_argument &e) {
    err << "error: invalid configuration: " << e.what() << "\n";
    return kExitConfigError;
  }

  SequenceSource seq;
  try {
    seq = open_sequence(opts.input, opts.pipeline.max_lidar_range);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }

  const std::size_t threads = configured_threads();
  OdometryPipeline pipeline(opts.pipeline, threads);
  nlohmann::json frames = nlohmann::json::array();
  std::size_t degenerate = 0;

  for (std::size_t k = 0; k < seq.scans.size(); ++k) {
    RawScan scan;
    try {
      scan = load_scan(seq.scans[k]);
    } catch (const std::exception &e) {
      err << "error: " << seq.scans[k].string() << ": " << e.what() << "\n";
      return kExitDataError;
    }
    if (opts.synth_timestamps) scan = synthesize_timestamps(scan);
    const FrameResult r = pipeline.process_frame(scan);
    if (r.degenerate && k > 0) {
      ++degenerate;
      err << "warning: frame " << k << " is degenerate (all " << r.registrations_aborted
          << " registrations aborted), using the motion prediction\n";
    }
    if (r.iteration_cap_hits > 0) {
      err << "warning: frame " << k << ": " << r.iteration_cap_hits << " registration(s) hit the ICP iteration cap\n";
    }
    if (!opts.quiet) {
      out << "frame " << k << "/" << seq.scans.size() << "  constraints=" << r.constraints_added
          << " aborted=" << r.registrations_aborted << " active=" << r.active_nodes
          << (r.keyframe_inserted ? " +keyframe" : "") << "\n";
    }
    frames.push_back({{"frame", k},
                      {"scan", seq.scans[k].filename().string()},
                      {"constraints_added", r.constraints_added},
                      {"registrations_aborted", r.registrations_aborted},
                      {"iteration_cap_hits", r.iteration_cap_hits},
                      {"degenerate", r.degenerate && k > 0},
                      {"keyframe_inserted", r.keyframe_inserted},
                      {"evicted", r.evicted},
                      {"chi2_before", r.chi2_before},
                      {"chi2_after", r.chi2_after},
                      {"keyframe_points", r.keyframe_points},
                      {"registration_points", r.registration_points},
                      {"active_nodes", r.active_nodes}});
  }

  nlohmann::json report;
  report["config"] = config_json(opts.pipeline);
  report["config"]["synth_timestamps"] = opts.synth_timestamps;
  report["input"] = opts.input.string();
  report["seed"] = opts.seed;
  report["frames_processed"] = seq.scans.size();
  report["degenerate_frames"] = degenerate;
  report["frames"] = std::move(frames);

  try {
    std::filesystem::create_directories(opts.output);
    save_text(opts.output / "trajectory.txt", write_trajectory(pipeline.trajectory()));
    if (seq.ground_truth) {
      if (seq.ground_truth->size() != pipeline.trajectory().size()) {
        err << "warning: poses.txt has " << seq.ground_truth->size() << " rows for " << seq.scans.size()
            << " scans, skipping evaluation\n";
      } else {
        const auto rep = rte(pipeline.trajectory(), *seq.ground_truth, opts.lengths, opts.rte_step);
        save_text(opts.output / "rte.json", rte_to_json(rep, opts.input.filename().string()));
        report["rte_translation_pct"] = rep.translation_pct;
        out << rte_table(rep, opts.input.filename().string());
      }
    }
    save_text(opts.output / "report.json", report.dump(2) + "\n");
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

int cmd_simulate(const SimulateOptions &opts, std::ostream &out, std::ostream &err) {
  if (opts.trajectory.frames == 0 || opts.sensor.rings <= 0 || opts.sensor.azimuth_steps <= 0 ||
      opts.sensor.noise_sigma < 0.0) {
    err << "error: frames, rings and azimuth steps must be positive and noise non-negative\n";
    return kExitConfigError;
  }
  const ScriptedTrajectory traj = scripted_drive(opts.trajectory);
  World world;
  if (opts.world == "street") {
    world = make_street_world(traj, opts.seed);
  } else if (opts.world == "block") {
    world = make_block_world(opts.seed);
  } else {
    err << "error: unknown world '" << opts.world << "'\n";
    return kExitConfigError;
  }
  try {
    const SyntheticSequence seq = generate_sequence(world, traj, opts.sensor, opts.seed);
    write_sequence(opts.output, seq);
    out << "wrote " << seq.scans.size() << " scans to " << opts.output.string() << "\n";
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions &opts, std::ostream &out, std::ostream &err) {
  try {
    const auto est = load_trajectory(opts.estimate);
    const auto gt = load_trajectory(opts.ground_truth);
    if (est.size() != gt.size()) {
      err << "error: estimate has " << est.size() << " rows, ground truth has " << gt.size() << "\n";
      return kExitDataError;
    }
    const RteReport rep = rte(est, gt, opts.lengths, opts.rte_step);
    if (rep.empty) err << "warning: trajectory is shorter than every segment length, report is empty\n";
    const std::string table = rte_table(rep, opts.sequence);
    out << table;
    if (!opts.output.empty()) {
      std::filesystem::create_directories(opts.output);
      save_text(opts.output / "rte.json", rte_to_json(rep, opts.sequence));
      save_text(opts.output / "rte.txt", table);
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

int main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"scanweave: multi-keyframe scan-to-scan lidar odometry"};
  app.require_subcommand(1);

  // run
  RunFlags flags;
  RunOptions run;
  auto *run_cmd = app.add_subcommand("run", "Estimate the trajectory of a scan sequence");
  run_cmd->add_option("-i,--input", run.input, "Directory of .bin or .csv scans")->required();
  run_cmd->add_option("-o,--output", run.output, "Output directory")->required();
  run_cmd->add_option("--config", flags.config_path, "key=value config file");
  run_cmd->add_option("--v-map", flags.v_map, "Keyframe voxel size [m] (0.5)");
  run_cmd->add_option("--v-icp", flags.v_icp, "Registration voxel size [m] (1.5)");
  run_cmd->add_option("--d-max", flags.d_max, "Correspondence search radius [m] (3)");
  run_cmd->add_option("--tau", flags.tau, "Robust kernel scale [m] (1/3)");
  run_cmd->add_option("--conv-eps", flags.conv_eps, "ICP convergence threshold on the increment (1e-5)");
  run_cmd->add_option("--min-corrs", flags.min_corrs, "Minimum correspondences per ICP iteration (200)");
  run_cmd->add_option("--max-icp-iters", flags.max_icp_iters, "ICP iteration cap (100)");
  run_cmd->add_option("--kappa", flags.kappa, "Keyframe insertion distance [m] (3)");
  run_cmd->add_option("--gamma", flags.gamma, "Keyframe window radius [m] (max-range / 3)");
  run_cmd->add_option("--max-range", flags.max_range, "Sensor maximum range [m] (100)");
  run_cmd->add_option("--lm-iters", flags.lm_iters, "Levenberg-Marquardt iterations per frame (15)");
  run_cmd->add_flag("--synth-timestamps", flags.synth_timestamps, "Derive per-point times from azimuth");
  run_cmd->add_option("--rte-step", flags.rte_step, "Start-frame stride for evaluation (1)");
  run_cmd->add_option("--lengths", flags.lengths, "Comma-separated evaluation segment lengths [m]");
  run_cmd->add_option("--seed", flags.seed, "Recorded in report.json; the pipeline is deterministic");
  run_cmd->add_flag("-q,--quiet", run.quiet, "Suppress per-frame progress");

  // simulate
  SimulateOptions sim;
  sim.trajectory.frames = 200;
  sim.trajectory.yaw_rate = 0.25;
  sim.trajectory.turn_period = 40;
  sim.trajectory.ramp_frames = 20;
  sim.trajectory.pitch_amplitude = 0.01;
  sim.trajectory.roll_amplitude = 0.008;
  sim.trajectory.bounce_amplitude = 0.03;
  sim.sensor.noise_sigma = 0.02;
  auto *sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scan sequence with ground truth");
  sim_cmd->add_option("-o,--output", sim.output, "Output directory")->required();
  sim_cmd->add_option("--world", sim.world, "street | block")->capture_default_str();
  sim_cmd->add_option("--frames", sim.trajectory.frames)->capture_default_str();
  sim_cmd->add_option("--speed", sim.trajectory.speed, "m/s")->capture_default_str();
  sim_cmd->add_option("--dt", sim.trajectory.dt, "s per frame")->capture_default_str();
  sim_cmd->add_option("--yaw-rate", sim.trajectory.yaw_rate, "rad/s while turning")->capture_default_str();
  sim_cmd->add_option("--turn-period", sim.trajectory.turn_period, "frames per phase, 0 = constant turn")
      ->capture_default_str();
  sim_cmd->add_option("--ramp-frames", sim.trajectory.ramp_frames, "frames to accelerate from rest")
      ->capture_default_str();
  sim_cmd->add_option("--pitch", sim.trajectory.pitch_amplitude, "pitch sway amplitude [rad]")->capture_default_str();
  sim_cmd->add_option("--roll", sim.trajectory.roll_amplitude, "roll sway amplitude [rad]")->capture_default_str();
  sim_cmd->add_option("--bounce", sim.trajectory.bounce_amplitude, "height sway amplitude [m]")->capture_default_str();
  sim_cmd->add_option("--noise", sim.sensor.noise_sigma, "range noise sigma [m]")->capture_default_str();
  sim_cmd->add_option("--max-range", sim.sensor.max_range)->capture_default_str();
  sim_cmd->add_option("--rings", sim.sensor.rings)->capture_default_str();
  sim_cmd->add_option("--azimuth-steps", sim.sensor.azimuth_steps)->capture_default_str();
  sim_cmd->add_flag("--sweep-distortion", sim.sensor.sweep_distortion, "Capture scans while moving");
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();

  // evaluate
  EvaluateOptions eval;
  std::string eval_lengths;
  auto *eval_cmd = app.add_subcommand("evaluate", "Relative translational error of a trajectory");
  eval_cmd->add_option("-e,--estimate", eval.estimate)->required();
  eval_cmd->add_option("-g,--ground-truth", eval.ground_truth)->required();
  eval_cmd->add_option("-o,--output", eval.output, "Directory for rte.json and rte.txt");
  eval_cmd->add_option("--lengths", eval_lengths, "Comma-separated segment lengths [m]");
  eval_cmd->add_option("--rte-step", eval.rte_step)->capture_default_str();
  eval_cmd->add_option("--sequence", eval.sequence)->capture_default_str();

  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(resolve_run(flags, run), out, err);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*eval_cmd) {
      if (!eval_lengths.empty()) eval.lengths = parse_lengths(eval_lengths);
      if (eval.rte_step == 0) throw ConfigError("rte-step must be positive");
      return cmd_evaluate(eval, out, err);
    }
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace scanweave::cli
