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
 * \file odometry.hpp
 * \brief Multi-keyframe scan-to-scan lidar odometry.
 *
 * Every frame is registered independently against each keyframe inside the
 * sliding window. The resulting relative-pose constraints are smoothed by a
 * pose graph, after which keyframes are inserted (spacing kappa) and retired
 * (distance gamma). Nodes that leave the window are fixed.
 */
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "scanweave/icp.hpp"
#include "scanweave/kdtree.hpp"
#include "scanweave/pose_graph.hpp"
#include "scanweave/preprocess.hpp"

namespace scanweave {

struct PipelineConfig {
  double v_map = 0.5;
  double v_icp = 1.5;
  double d_max = 3.0;
  double tau = 1.0 / 3.0;
  double conv_eps = 1e-5;
  int max_icp_iters = 100;
  std::size_t min_corrs = 200;
  double kappa = 3.0;
  std::optional<double> gamma;  // defaults to max_lidar_range / 3
  int lm_iters = 15;
  double max_lidar_range = 100.0;

  double effective_gamma() const { return gamma.value_or(max_lidar_range / 3.0); }
  IcpParams icp_params() const { return {d_max, tau, conv_eps, max_icp_iters, min_corrs}; }
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct Keyframe {
  NodeId node = 0;
  std::size_t time_index = 0;
  DownsampledScan cloud;
  std::shared_ptr<const SpatialIndex> index;
  Pose pose;  // refreshed from the smoothed graph after every frame
};

struct RegistrationOutcome {
  NodeId keyframe = 0;
  bool success = false;
  bool hit_iteration_cap = false;
  Pose measurement;                         // pose of the current scan in the keyframe frame
  Matrix6d information = Matrix6d::Zero();  // right-perturbation coordinates of `measurement`
  int iterations = 0;
  std::size_t correspondences = 0;
};

struct FrameResult {
  NodeId node = 0;
  Pose pose;
  std::size_t constraints_added = 0;
  std::size_t registrations_aborted = 0;
  std::size_t iteration_cap_hits = 0;  // registrations that stopped at max_icp_iters
  bool degenerate = false;
  bool keyframe_inserted = false;
  std::vector<NodeId> evicted;
  double chi2_before = 0.0;
  double chi2_after = 0.0;
  std::size_t keyframe_points = 0;
  std::size_t registration_points = 0;
  std::size_t active_nodes = 0;
};

/// Inter-frame motion x_prev2^-1 * x_prev.
Pose predict_motion(const Pose &x_prev, const Pose &x_prev2);
/// x_prev * motion.
Pose predict_pose(const Pose &x_prev, const Pose &motion);

/// One outcome per keyframe, ordered by keyframe node id.
std::vector<RegistrationOutcome> register_to_keyframes(const DownsampledScan &scan, const Pose &predicted,
                                                       std::span<const Keyframe> keyframes,
                                                       const PipelineConfig &cfg, std::size_t threads = 1);

class OdometryPipeline {
 public:
  explicit OdometryPipeline(PipelineConfig cfg, std::size_t threads = 1);

  FrameResult process_frame(const RawScan &scan);

  /// Latest estimate of every processed frame, indexed by node id.
  const std::vector<Pose> &trajectory() const { return trajectory_; }
  const PoseGraph &graph() const { return graph_; }
  const std::vector<Keyframe> &keyframes() const { return keyframes_; }
  const PipelineConfig &config() const { return cfg_; }

 private:
  struct KeyframeUpdate {
    bool inserted = false;
    std::vector<NodeId> evicted;
  };

  KeyframeUpdate manage_keyframes(NodeId current, DownsampledScan cloud);
  void insert_keyframe(NodeId node, DownsampledScan cloud);
  void refresh_poses();

  PipelineConfig cfg_;
  std::size_t threads_;
  PoseGraph graph_;
  std::vector<Keyframe> keyframes_;
  std::vector<Pose> trajectory_;
};

}  // namespace scanweave
