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

#include "scanweave/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace scanweave {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

SpatialIndex::SpatialIndex(PointList points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("SpatialIndex: target cloud is empty");
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("SpatialIndex: cloud too large");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  auto &node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void SpatialIndex::search(std::int32_t id, const Point3 &q, double &best_sq, std::size_t &best_idx) const {
  const Node &node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d = (q - points_[idx]).squaredNorm();
      if (d < best_sq || (d == best_sq && idx < best_idx)) {
        best_sq = d;
        best_idx = idx;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  search(near, q, best_sq, best_idx);
  // <= keeps equidistant candidates on the far side reachable for the tie rule
  if (diff * diff <= best_sq) search(far, q, best_sq, best_idx);
}

std::optional<Neighbor> SpatialIndex::nearest(const Point3 &query, double max_distance) const {
  const double max_sq = max_distance * max_distance;
  double best_sq = max_sq;
  std::size_t best_idx = std::numeric_limits<std::size_t>::max();
  search(0, query, best_sq, best_idx);
  if (best_idx == std::numeric_limits<std::size_t>::max() || !(best_sq < max_sq)) return std::nullopt;
  return Neighbor{best_idx, std::sqrt(best_sq)};
}

SpatialIndex build_index(const DownsampledScan &target) { return SpatialIndex(target.points); }

}  // namespace scanweave
