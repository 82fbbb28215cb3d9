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
 * \file kdtree.hpp
 * \brief Exact nearest-neighbour index over a fixed point cloud.
 *
 * Queries return the closest indexed point strictly within the search radius.
 * Equidistant candidates resolve to the lowest insertion index, so results
 * match a linear scan bit for bit. The index is immutable after construction
 * and safe for concurrent queries.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scanweave/preprocess.hpp"

namespace scanweave {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

class SpatialIndex {
 public:
  /// Throws std::invalid_argument on an empty cloud.
  explicit SpatialIndex(PointList points);

  std::optional<Neighbor> nearest(const Point3 &query, double max_distance) const;

  const PointList &points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    // Leaves reference [begin, end) of order_; inner nodes split on `axis`.
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3 &q, double &best_sq, std::size_t &best_idx) const;

  PointList points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

SpatialIndex build_index(const DownsampledScan &target);

}  // namespace scanweave
