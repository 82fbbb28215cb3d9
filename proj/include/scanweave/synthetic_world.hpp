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
 * \file synthetic_world.hpp
 * \brief Deterministic lidar simulator over boxes and planes.
 *
 * The ray pattern is fixed: `rings` elevation rings spread uniformly over
 * [min_elevation, max_elevation] and `azimuth_steps` columns over a full turn
 * starting at -pi. Columns are swept in order, so a point's relative
 * timestamp is column / (azimuth_steps - 1). Noise is additive Gaussian on the
 * measured range only.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "scanweave/preprocess.hpp"

namespace scanweave {

struct Box {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
};

/// Points x with normal.dot(x) == offset.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
};

struct World {
  std::vector<Box> boxes;
  std::vector<Plane> planes;
  std::uint64_t seed = 0;
};

struct SensorParams {
  int rings = 64;
  int azimuth_steps = 512;
  double min_elevation = -22.5 * M_PI / 180.0;
  double max_elevation = 22.5 * M_PI / 180.0;
  double max_range = 100.0;
  double min_range = 0.5;
  double noise_sigma = 0.0;
  /// When set, scans are captured while moving and keep their timestamps;
  /// otherwise every ray leaves from the frame pose and timestamps are dropped.
  bool sweep_distortion = false;
};

struct TrajectoryParams {
  std::size_t frames = 100;
  double speed = 10.0;     // m/s
  double dt = 0.1;         // s per frame
  double yaw_rate = 0.0;   // rad/s while turning
  std::size_t turn_period = 0;  // frames per straight/turn phase, 0 turns continuously
  double height = 1.8;     // sensor height above the ground plane
  std::size_t ramp_frames = 0;  // accelerate linearly from rest over this many steps
  // Suspension sway superimposed on the planar path: sinusoidal pitch, roll and
  // height with periods in seconds. Zero amplitudes give a perfectly level sensor.
  double pitch_amplitude = 0.0;  // rad
  double roll_amplitude = 0.0;   // rad
  double bounce_amplitude = 0.0;  // m
  double pitch_period = 1.3;
  double roll_period = 1.7;
  double bounce_period = 0.9;
};

struct ScriptedTrajectory {
  std::vector<Pose> poses;
  TrajectoryParams params;
};

struct SyntheticSequence {
  std::vector<RawScan> scans;
  std::vector<Pose> ground_truth;
};

/// Casts the fixed ray pattern from `pose`. With `sweep_motion` set, the ray
/// at relative time s leaves from pose * interpolate(sweep_motion, s - 1).
RawScan raycast_scan(const World &world, const Pose &pose, const SensorParams &sensor, std::uint64_t seed,
                     const std::optional<Pose> &sweep_motion = std::nullopt);

/// First hit distance along a ray, if any primitive is hit within (min_t, max_t].
std::optional<double> intersect(const World &world, const Eigen::Vector3d &origin, const Eigen::Vector3d &dir,
                                double min_t, double max_t);

/// Straight segments alternating with left/right turns of `yaw_rate`.
ScriptedTrajectory scripted_drive(const TrajectoryParams &params);

/// Ground plane plus buildings and poles lining the trajectory, leaving a
/// clear corridor around the path.
World make_street_world(const ScriptedTrajectory &trajectory, std::uint64_t seed);

/// A compact box-and-plane scene around the origin for registration tests.
World make_block_world(std::uint64_t seed);
/// Ground plane enclosed by four walls at +-half_extent, with `interior_boxes`
/// random obstacles kept at least 3 m from the origin.
World make_courtyard_world(std::uint64_t seed, double half_extent = 8.0, std::size_t interior_boxes = 10);

/// Ground truth is expressed relative to the first pose.
SyntheticSequence generate_sequence(const World &world, const ScriptedTrajectory &trajectory,
                                    const SensorParams &sensor, std::uint64_t seed);

/// Writes scan_000000.csv ... and poses.txt into `dir`.
void write_sequence(const std::filesystem::path &dir, const SyntheticSequence &seq);

}  // namespace scanweave
