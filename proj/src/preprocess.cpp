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

#include "scanweave/preprocess.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace scanweave {

void RawScan::validate() const {
  if (!timestamps) return;
  if (timestamps->size() != points.size()) {
    throw std::invalid_argument("RawScan: timestamp count does not match point count");
  }
  for (double s : *timestamps) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("RawScan: timestamp outside [0, 1]");
  }
}

VoxelKey voxel_key(const Point3 &p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

RawScan deskew(const RawScan &scan, const Pose &motion) {
  if (!scan.timestamps) return scan;
  scan.validate();
  RawScan out = scan;
  const Twist xi = se3::log(motion);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const double s = (*scan.timestamps)[i] - 1.0;
    out.points[i] = transform_point(se3::exp({s * xi.rho, s * xi.phi}), scan.points[i]);
  }
  return out;
}

DownsampledScan voxel_downsample(std::span<const Point3> points, double voxel_size) {
  if (!(voxel_size > 0.0)) throw std::invalid_argument("voxel_downsample: voxel size must be positive");
  DownsampledScan out;
  out.source_voxel_size = voxel_size;
  std::unordered_set<VoxelKey, VoxelKeyHash> occupied;
  occupied.reserve(points.size());
  for (const auto &p : points) {
    if (occupied.insert(voxel_key(p, voxel_size)).second) out.points.push_back(p);
  }
  return out;
}

PreprocessedScan preprocess(const RawScan &scan, const Pose &motion, double v_map, double v_icp) {
  if (!(v_map > 0.0) || v_icp < v_map) {
    throw std::invalid_argument("preprocess: voxel sizes must satisfy 0 < v_map <= v_icp");
  }
  const RawScan deskewed = deskew(scan, motion);
  PreprocessedScan out;
  out.keyframe = voxel_downsample(deskewed.points, v_map);
  out.registration = voxel_downsample(out.keyframe.points, v_icp);
  return out;
}

}  // namespace scanweave
