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
 * \file preprocess.hpp
 * \brief Scan deskewing and the two-level voxel subsampling.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "scanweave/se3.hpp"

namespace scanweave {

using Point3 = Eigen::Vector3d;
using PointList = std::vector<Point3>;

struct RawScan {
  PointList points;                            // sensor frame, meters
  std::optional<std::vector<double>> timestamps;  // relative sweep time in [0, 1]
  double frame_time = 0.0;                     // seconds

  /// Throws std::invalid_argument if timestamps are malformed.
  void validate() const;
};

struct DownsampledScan {
  PointList points;
  double source_voxel_size = 0.0;
};

struct VoxelKey {
  std::int64_t ix = 0, iy = 0, iz = 0;
  bool operator==(const VoxelKey &) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey &k) const noexcept {
    // Teschner et al. spatial hash primes
    return static_cast<std::size_t>((k.ix * 73856093) ^ (k.iy * 19349669) ^ (k.iz * 83492791));
  }
};

VoxelKey voxel_key(const Point3 &p, double voxel_size);

/// Moves every timestamped point into the end-of-sweep frame using the
/// constant-motion model. Scans without timestamps are returned unchanged.
RawScan deskew(const RawScan &scan, const Pose &motion);

/// Keeps the first point that lands in each voxel, preserving input order.
DownsampledScan voxel_downsample(std::span<const Point3> points, double voxel_size);

struct PreprocessedScan {
  DownsampledScan keyframe;      // v_map density
  DownsampledScan registration;  // v_icp density, subset of keyframe
};

/// Throws std::invalid_argument unless 0 < v_map <= v_icp.
PreprocessedScan preprocess(const RawScan &scan, const Pose &motion, double v_map, double v_icp);

}  // namespace scanweave
