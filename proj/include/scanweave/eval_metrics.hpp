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
 * \file eval_metrics.hpp
 * \brief KITTI-style relative translational error (RTE).
 *
 * For every start frame (advancing by `step`) and segment length L, the
 * segment ends at the first frame whose ground-truth path length from the
 * start exceeds L. The error pose (est_delta^-1 * gt_delta) gives
 * |t| / L as translational drift and angle / L as rotational drift.
 */
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scanweave/se3.hpp"

namespace scanweave {

struct SegmentError {
  std::size_t first_frame = 0;
  double length = 0.0;
  double translation = 0.0;  // fraction per meter
  double rotation = 0.0;     // rad per meter
};

struct LengthError {
  double length = 0.0;
  std::size_t segments = 0;
  double translation_pct = 0.0;
  double rotation_deg_per_m = 0.0;
};

struct RteReport {
  std::vector<LengthError> per_length;  // lengths with at least one segment
  std::vector<SegmentError> segments;
  double translation_pct = 0.0;         // mean over all segments
  double rotation_deg_per_m = 0.0;
  bool empty = true;  // no segment was long enough
};

inline const std::vector<double> kKittiLengths = {100, 200, 300, 400, 500, 600, 700, 800};
inline const std::vector<double> kDeskLengths = {10, 20, 30, 40, 50, 60, 70, 80};

/// Throws std::invalid_argument when the trajectories differ in length or step is 0.
RteReport rte(std::span<const Pose> estimate, std::span<const Pose> ground_truth, std::span<const double> lengths,
              std::size_t step = 1);

std::string rte_to_json(const RteReport &report, const std::string &sequence);
/// One row per segment length plus an `avg` row.
std::string rte_table(const RteReport &report, const std::string &sequence);

}  // namespace scanweave
