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

#include "scanweave/odometry.hpp"

#include <algorithm>
#include <stdexcept>

#include "scanweave/parallel.hpp"

namespace scanweave {

namespace {

double distance(const Pose &a, const Pose &b) { return (a.translation() - b.translation()).norm(); }

}  // namespace

void PipelineConfig::validate() const {
  if (!(v_map > 0.0)) throw std::invalid_argument("v_map must be positive");
  if (v_icp < v_map) throw std::invalid_argument("v_icp must not be smaller than v_map");
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(conv_eps > 0.0)) throw std::invalid_argument("conv_eps must be positive");
  if (max_icp_iters < 1) throw std::invalid_argument("max_icp_iters must be at least 1");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(max_lidar_range > 0.0)) throw std::invalid_argument("max_lidar_range must be positive");
  if (!(effective_gamma() > kappa)) throw std::invalid_argument("gamma must exceed kappa");
  if (lm_iters < 0) throw std::invalid_argument("lm_iters must not be negative");
}

Pose predict_motion(const Pose &x_prev, const Pose &x_prev2) { return inverse(x_prev2) * x_prev; }

Pose predict_pose(const Pose &x_prev, const Pose &motion) { return x_prev * motion; }

std::vector<RegistrationOutcome> register_to_keyframes(const DownsampledScan &scan, const Pose &predicted,
                                                       std::span<const Keyframe> keyframes,
                                                       const PipelineConfig &cfg, std::size_t threads) {
  std::vector<RegistrationOutcome> outcomes(keyframes.size());
  const IcpParams params = cfg.icp_params();

  parallel_for(keyframes.size(), threads, [&](std::size_t k) {
    const Keyframe &kf = keyframes[k];
    RegistrationOutcome &out = outcomes[k];
    out.keyframe = kf.node;

    const Pose initial = inverse(kf.pose) * predicted;
    PointList source;
    source.reserve(scan.points.size());
    for (const auto &p : scan.points) source.push_back(initial * p);

    RegistrationResult reg;
    try {
      reg = icp(source, *kf.index, params);
    } catch (const DegenerateGeometry &) {
      return;
    }
    out.iterations = reg.iterations;
    out.correspondences = reg.final_correspondences;
    if (!reg.usable()) return;

    out.success = true;
    out.hit_iteration_cap = reg.status == IcpStatus::IterationLimit;
    out.measurement = reg.delta * initial;
    // ICP reports information for a left perturbation in the keyframe frame;
    // the graph residual lives in the right-perturbation tangent of z.
    const Matrix6d ad = se3::adjoint(out.measurement);
    const Matrix6d info = ad.transpose() * reg.information * ad;
    out.information = 0.5 * (info + info.transpose());
  });

  std::sort(outcomes.begin(), outcomes.end(),
            [](const RegistrationOutcome &a, const RegistrationOutcome &b) { return a.keyframe < b.keyframe; });
  return outcomes;
}

OdometryPipeline::OdometryPipeline(PipelineConfig cfg, std::size_t threads)
    : cfg_(std::move(cfg)), threads_(std::max<std::size_t>(threads, 1)) {
  cfg_.validate();
}

FrameResult OdometryPipeline::process_frame(const RawScan &scan) {
  FrameResult result;
  const NodeId id = trajectory_.size();
  result.node = id;

  const std::size_t t = trajectory_.size();
  const Pose motion = t >= 2 ? predict_motion(trajectory_[t - 1], trajectory_[t - 2]) : Pose::Identity();
  PreprocessedScan pre = preprocess(scan, motion, cfg_.v_map, cfg_.v_icp);
  result.keyframe_points = pre.keyframe.points.size();
  result.registration_points = pre.registration.points.size();

  const Pose predicted = t == 0 ? Pose::Identity() : predict_pose(trajectory_.back(), motion);

  // Bootstrap: with nothing to register against, the frame anchors the graph.
  if (keyframes_.empty()) {
    graph_.add_node(id, predicted, true);
    trajectory_.push_back(predicted);
    result.degenerate = t != 0;
    if (!pre.keyframe.points.empty()) {
      insert_keyframe(id, std::move(pre.keyframe));
      result.keyframe_inserted = true;
    }
    result.pose = predicted;
    return result;
  }

  const auto outcomes = register_to_keyframes(pre.registration, predicted, keyframes_, cfg_, threads_);

  const RegistrationOutcome *anchor = nullptr;
  for (const auto &o : outcomes) {
    if (!o.success) {
      ++result.registrations_aborted;
      continue;
    }
    if (o.hit_iteration_cap) ++result.iteration_cap_hits;
    anchor = &o;  // outcomes are sorted, so this ends on the newest success
  }

  if (anchor == nullptr) {
    result.degenerate = true;
    result.pose = predicted;
    trajectory_.push_back(predicted);
    result.active_nodes = graph_.active_count();
    return result;
  }

  const auto kf = std::find_if(keyframes_.begin(), keyframes_.end(),
                               [&](const Keyframe &k) { return k.node == anchor->keyframe; });
  graph_.add_node(id, kf->pose * anchor->measurement);
  trajectory_.push_back(kf->pose * anchor->measurement);
  for (const auto &o : outcomes) {
    if (!o.success) continue;
    graph_.add_constraint({id, o.keyframe, o.measurement, o.information});
    ++result.constraints_added;
  }

  result.chi2_before = graph_.chi2();
  try {
    result.chi2_after = graph_.optimize(cfg_.lm_iters).final_chi2;
  } catch (const UnrecoverableGeometry &) {
    result.chi2_after = result.chi2_before;
  }
  refresh_poses();

  const auto update = manage_keyframes(id, std::move(pre.keyframe));
  result.keyframe_inserted = update.inserted;
  result.evicted = update.evicted;
  result.pose = trajectory_[id];
  result.active_nodes = graph_.active_count();
  return result;
}

void OdometryPipeline::insert_keyframe(NodeId node, DownsampledScan cloud) {
  Keyframe kf;
  kf.node = node;
  kf.time_index = node;
  kf.index = std::make_shared<const SpatialIndex>(cloud.points);
  kf.cloud = std::move(cloud);
  kf.pose = trajectory_[node];
  keyframes_.push_back(std::move(kf));
}

void OdometryPipeline::refresh_poses() {
  for (const auto &[id, n] : graph_.nodes()) trajectory_[id] = n.pose;
  for (auto &kf : keyframes_) kf.pose = trajectory_[kf.node];
}

OdometryPipeline::KeyframeUpdate OdometryPipeline::manage_keyframes(NodeId current, DownsampledScan cloud) {
  KeyframeUpdate update;
  const Pose &x_t = trajectory_[current];
  const double gamma = cfg_.effective_gamma();

  if (keyframes_.empty() || distance(x_t, keyframes_.back().pose) > cfg_.kappa) {
    if (!cloud.points.empty()) {
      insert_keyframe(current, std::move(cloud));
      update.inserted = true;
    }
  }

  std::erase_if(keyframes_, [&](const Keyframe &kf) {
    if (distance(kf.pose, x_t) <= gamma) return false;
    update.evicted.push_back(kf.node);
    return true;
  });

  std::vector<NodeId> to_fix;
  for (const auto &[id, n] : graph_.nodes()) {
    if (!n.fixed && distance(n.pose, x_t) > gamma) to_fix.push_back(id);
  }
  for (NodeId id : to_fix) graph_.fix_node(id);
  graph_.drop_fixed_constraints();

  std::vector<NodeId> to_remove;
  for (const auto &[id, n] : graph_.nodes()) {
    const bool is_keyframe =
        std::any_of(keyframes_.begin(), keyframes_.end(), [id = id](const Keyframe &k) { return k.node == id; });
    if (n.fixed && !is_keyframe && !graph_.referenced(id)) to_remove.push_back(id);
  }
  for (NodeId id : to_remove) graph_.remove_node(id);

  if (!graph_.nodes().empty()) graph_.fix_node(graph_.nodes().begin()->first);
  return update;
}

}  // namespace scanweave
