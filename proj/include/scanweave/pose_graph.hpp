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
 * \file pose_graph.hpp
 * \brief Sliding-window pose graph with a Levenberg-Marquardt smoother.
 *
 * A constraint from node i to keyframe node j carries the measured pose of i
 * in the frame of j. Its residual is log(z^-1 * x_j^-1 * x_i). Nodes are
 * updated on the right, x <- x * exp(delta), and fixed nodes never move.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scanweave/se3.hpp"

namespace scanweave {

using NodeId = std::uint64_t;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// LM could not produce a solvable damped system; the graph is left untouched.
class UnrecoverableGeometry : public GraphError {
 public:
  using GraphError::GraphError;
};

struct GraphNode {
  NodeId id = 0;
  Pose pose;
  bool fixed = false;
};

struct Constraint {
  NodeId from = 0;  // newer scan
  NodeId to = 0;    // keyframe
  Pose measurement;
  Matrix6d information = Matrix6d::Identity();
};

/// Residual of a single constraint.
Twist edge_error(const Pose &x_i, const Pose &x_j, const Pose &z_ij);

/// Jacobians of edge_error w.r.t. right perturbations of x_i and x_j.
std::pair<Matrix6d, Matrix6d> edge_error_jacobians(const Pose &x_i, const Pose &x_j, const Pose &z_ij);

struct OptimizationSummary {
  double initial_chi2 = 0.0;
  double final_chi2 = 0.0;
  int iterations = 0;  // accepted + rejected solves
  int accepted = 0;
  std::vector<double> chi2_history;  // initial value followed by every accepted step
};

struct LmSettings {
  double initial_lambda = 1e-4;
  double lambda_factor = 10.0;
  double max_lambda = 1e8;
};

class PoseGraph {
 public:
  void add_node(NodeId id, const Pose &pose, bool fixed = false);
  void fix_node(NodeId id);
  void set_pose(NodeId id, const Pose &pose);
  /// Rejects unknown endpoints, self loops and asymmetric information.
  void add_constraint(const Constraint &c);
  /// Only fixed nodes that no constraint references may be removed.
  void remove_node(NodeId id);
  /// Drops every constraint whose endpoints are both fixed; returns how many.
  std::size_t drop_fixed_constraints();

  bool contains(NodeId id) const { return nodes_.contains(id); }
  const GraphNode &node(NodeId id) const;
  const std::map<NodeId, GraphNode> &nodes() const { return nodes_; }
  const std::vector<Constraint> &constraints() const { return constraints_; }
  std::size_t active_count() const;
  bool referenced(NodeId id) const;

  double chi2() const;

  /// Runs at most `iterations` damped solves. Requires at least one fixed node.
  OptimizationSummary optimize(int iterations, const LmSettings &settings = {});

  /// Text dump: `NODE id tx ty tz qx qy qz qw fixed` and
  /// `EDGE from to tx ty tz qx qy qz qw` + 21 upper-triangular information entries.
  void write(std::ostream &os) const;
  static PoseGraph read(std::istream &is);

 private:
  std::map<NodeId, GraphNode> nodes_;
  std::vector<Constraint> constraints_;
};

}  // namespace scanweave
