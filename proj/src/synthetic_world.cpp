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

#include "scanweave/synthetic_world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "scanweave/dataset_io.hpp"

namespace scanweave {

namespace {

std::optional<double> intersect_box(const Box &b, const Eigen::Vector3d &o, const Eigen::Vector3d &d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < b.min[k] || o[k] > b.max[k]) return std::nullopt;
      continue;
    }
    double t1 = (b.min[k] - o[k]) / d[k];
    double t2 = (b.max[k] - o[k]) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  return t_near;
}

std::optional<double> intersect_plane(const Plane &p, const Eigen::Vector3d &o, const Eigen::Vector3d &d) {
  const double denom = p.normal.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  return (p.offset - p.normal.dot(o)) / denom;
}

// Squared 2D distance from a point to the footprint of a box.
double footprint_distance_sq(const Box &b, const Eigen::Vector3d &p) {
  const double dx = std::max({b.min.x() - p.x(), 0.0, p.x() - b.max.x()});
  const double dy = std::max({b.min.y() - p.y(), 0.0, p.y() - b.max.y()});
  return dx * dx + dy * dy;
}

double box_distance(const Box &b, const Eigen::Vector3d &p) {
  const Eigen::Vector3d d = (b.min - p).cwiseMax(Eigen::Vector3d::Zero()).cwiseMax(p - b.max);
  return d.norm();
}

}  // namespace

std::optional<double> intersect(const World &world, const Eigen::Vector3d &origin, const Eigen::Vector3d &dir,
                                double min_t, double max_t) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &b : world.boxes) {
    if (const auto t = intersect_box(b, origin, dir); t && *t > min_t && *t < best) best = *t;
  }
  for (const auto &p : world.planes) {
    if (const auto t = intersect_plane(p, origin, dir); t && *t > min_t && *t < best) best = *t;
  }
  if (best <= max_t) return best;
  return std::nullopt;
}

RawScan raycast_scan(const World &world, const Pose &pose, const SensorParams &sensor, std::uint64_t seed,
                     const std::optional<Pose> &sweep_motion) {
  // Only primitives that can be reached from somewhere along the sweep.
  World local;
  local.planes = world.planes;
  const double reach = sensor.max_range + (sweep_motion ? sweep_motion->translation().norm() : 0.0);
  for (const auto &b : world.boxes) {
    if (box_distance(b, pose.translation()) <= reach) local.boxes.push_back(b);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Twist motion_log = sweep_motion ? se3::log(*sweep_motion) : Twist::Zero();

  std::vector<Eigen::Vector3d> ring_dirs(static_cast<std::size_t>(sensor.rings));
  RawScan scan;
  scan.timestamps.emplace();
  for (int col = 0; col < sensor.azimuth_steps; ++col) {
    const double s = sensor.azimuth_steps > 1 ? static_cast<double>(col) / (sensor.azimuth_steps - 1) : 1.0;
    const double az = -M_PI + 2.0 * M_PI * col / sensor.azimuth_steps;
    Pose origin_pose = pose;
    if (sweep_motion) {
      origin_pose = pose * se3::exp({(s - 1.0) * motion_log.rho, (s - 1.0) * motion_log.phi});
    }
    for (int ring = 0; ring < sensor.rings; ++ring) {
      const double el = sensor.rings > 1 ? sensor.min_elevation + (sensor.max_elevation - sensor.min_elevation) *
                                                                      ring / (sensor.rings - 1)
                                         : 0.0;
      const Eigen::Vector3d dir_sensor(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Eigen::Vector3d dir_world = origin_pose.rotation() * dir_sensor;
      const auto hit = intersect(local, origin_pose.translation(), dir_world, sensor.min_range, sensor.max_range);
      if (!hit) continue;
      const double range = *hit + sensor.noise_sigma * noise(rng);
      scan.points.push_back(range * dir_sensor);
      scan.timestamps->push_back(s);
    }
  }
  return scan;
}

ScriptedTrajectory scripted_drive(const TrajectoryParams &params) {
  ScriptedTrajectory traj;
  traj.params = params;
  Pose current = Pose::FromTranslation({0.0, 0.0, params.height});
  auto wave = [&](double amplitude, double period, std::size_t k) {
    return amplitude == 0.0 ? 0.0 : amplitude * std::sin(2.0 * M_PI * static_cast<double>(k) * params.dt / period);
  };
  for (std::size_t k = 0; k < params.frames; ++k) {
    Twist sway;
    sway.rho = {0.0, 0.0, wave(params.bounce_amplitude, params.bounce_period, k)};
    sway.phi = {wave(params.roll_amplitude, params.roll_period, k), wave(params.pitch_amplitude, params.pitch_period, k),
                0.0};
    traj.poses.push_back(current * se3::exp(sway));
    double yaw_rate = params.yaw_rate;
    if (params.turn_period > 0) {
      const std::size_t phase = k / params.turn_period;
      // straight, left, straight, right, ...
      yaw_rate = phase % 2 == 0 ? 0.0 : (phase % 4 == 1 ? params.yaw_rate : -params.yaw_rate);
    }
    double scale = 1.0;
    if (k < params.ramp_frames) scale = static_cast<double>(k) / static_cast<double>(params.ramp_frames);
    Twist step;
    step.rho = {scale * params.speed * params.dt, 0.0, 0.0};
    step.phi = {0.0, 0.0, scale * yaw_rate * params.dt};
    current = current * se3::exp(step);
  }
  return traj;
}

World make_street_world(const ScriptedTrajectory &trajectory, std::uint64_t seed) {
  World world;
  world.seed = seed;
  world.planes.push_back({Eigen::Vector3d::UnitZ(), 0.0});
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  constexpr double kCorridor = 4.5;
  auto clear_of_path = [&](const Box &b) {
    return std::all_of(trajectory.poses.begin(), trajectory.poses.end(), [&](const Pose &p) {
      return footprint_distance_sq(b, p.translation()) > kCorridor * kCorridor;
    });
  };

  // extend the street a little beyond both ends of the path
  std::vector<Pose> anchors;
  if (!trajectory.poses.empty()) {
    const Pose &first = trajectory.poses.front();
    const Pose &last = trajectory.poses.back();
    for (int k = 6; k >= 1; --k) anchors.push_back(first * Pose::FromTranslation({-6.0 * k, 0.0, 0.0}));
    double since = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trajectory.poses.size(); ++i) {
      if (i > 0) since += (trajectory.poses[i].translation() - trajectory.poses[i - 1].translation()).norm();
      if (since >= 6.0) {
        anchors.push_back(trajectory.poses[i]);
        since = 0.0;
      }
    }
    for (int k = 1; k <= 6; ++k) anchors.push_back(last * Pose::FromTranslation({6.0 * k, 0.0, 0.0}));
  }

  for (const auto &a : anchors) {
    const Eigen::Vector3d forward = a.rotation().col(0);
    const Eigen::Vector3d left = a.rotation().col(1);
    const Eigen::Vector3d ground(a.translation().x(), a.translation().y(), 0.0);
    for (double side : {-1.0, 1.0}) {
      const Eigen::Vector3d center =
          ground + side * uniform(10.0, 16.0) * left + uniform(-2.0, 2.0) * forward;
      const Eigen::Vector3d half(uniform(1.5, 5.0), uniform(1.5, 5.0), 0.0);
      Box b{center - half, center + half};
      b.min.z() = 0.0;
      b.max.z() = uniform(4.0, 20.0);
      if (clear_of_path(b)) world.boxes.push_back(b);

      if (uniform(0.0, 1.0) < 0.5) {
        const Eigen::Vector3d pole = ground + side * uniform(5.5, 7.0) * left + uniform(-3.0, 3.0) * forward;
        const Eigen::Vector3d ph(0.15, 0.15, 0.0);
        Box p{pole - ph, pole + ph};
        p.min.z() = 0.0;
        p.max.z() = uniform(3.0, 6.0);
        if (clear_of_path(p)) world.boxes.push_back(p);
      }
    }
  }
  return world;
}

World make_block_world(std::uint64_t seed) {
  World world;
  world.seed = seed;
  world.planes.push_back({Eigen::Vector3d::UnitZ(), 0.0});
  // two perpendicular facades
  world.boxes.push_back({{25.0, -30.0, 0.0}, {27.0, 30.0, 12.0}});
  world.boxes.push_back({{-30.0, 22.0, 0.0}, {20.0, 24.0, 8.0}});
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  while (world.boxes.size() < 26) {
    const Eigen::Vector3d c(uniform(-22.0, 22.0), uniform(-20.0, 20.0), 0.0);
    if (std::hypot(c.x(), c.y()) < 6.0) continue;
    const Eigen::Vector3d half(uniform(0.5, 3.0), uniform(0.5, 3.0), 0.0);
    Box b{c - half, c + half};
    b.min.z() = 0.0;
    b.max.z() = uniform(1.0, 7.0);
    if (footprint_distance_sq(b, Eigen::Vector3d::Zero()) < 16.0) continue;
    world.boxes.push_back(b);
  }
  return world;
}

World make_courtyard_world(std::uint64_t seed, double half_extent, std::size_t interior_boxes) {
  World world;
  world.seed = seed;
  world.planes.push_back({Eigen::Vector3d::UnitZ(), 0.0});
  const double h = half_extent;
  world.boxes.push_back({{-h - 1.0, -h - 1.0, 0.0}, {-h, h + 1.0, 4.0}});
  world.boxes.push_back({{h, -h - 1.0, 0.0}, {h + 1.0, h + 1.0, 3.0}});
  world.boxes.push_back({{-h - 1.0, -h - 1.0, 0.0}, {h + 1.0, -h, 5.0}});
  world.boxes.push_back({{-h - 1.0, h, 0.0}, {h + 1.0, h + 1.0, 3.5}});
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  while (world.boxes.size() < 4 + interior_boxes) {
    const Eigen::Vector3d c(uniform(-h + 1.0, h - 1.0), uniform(-h + 1.0, h - 1.0), 0.0);
    if (c.norm() < 3.0) continue;
    const Eigen::Vector3d half(uniform(0.3, 1.2), uniform(0.3, 1.2), 0.0);
    Box b{c - half, c + half};
    b.min.z() = 0.0;
    b.max.z() = uniform(0.8, 3.0);
    world.boxes.push_back(b);
  }
  return world;
}

SyntheticSequence generate_sequence(const World &world, const ScriptedTrajectory &trajectory,
                                    const SensorParams &sensor, std::uint64_t seed) {
  SyntheticSequence seq;
  if (trajectory.poses.empty()) return seq;
  const Pose origin_inv = inverse(trajectory.poses.front());
  for (std::size_t k = 0; k < trajectory.poses.size(); ++k) {
    const Pose &pose = trajectory.poses[k];
    std::optional<Pose> motion;
    if (sensor.sweep_distortion) {
      motion = k > 0 ? inverse(trajectory.poses[k - 1]) * pose : Pose::Identity();
    }
    RawScan scan = raycast_scan(world, pose, sensor, seed * 1000003ULL + k, motion);
    if (!sensor.sweep_distortion) scan.timestamps.reset();
    scan.frame_time = static_cast<double>(k) * trajectory.params.dt;
    seq.scans.push_back(std::move(scan));
    seq.ground_truth.push_back(origin_inv * pose);
  }
  return seq;
}

void write_sequence(const std::filesystem::path &dir, const SyntheticSequence &seq) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < seq.scans.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "scan_%06zu.csv", k);
    save_text(dir / name, write_scan_csv(seq.scans[k]));
  }
  save_text(dir / "poses.txt", write_trajectory(seq.ground_truth));
}

}  // namespace scanweave
