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

#include "scanweave/pose_graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "scanweave/format.hpp"

namespace scanweave {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

using SparseMatrix = Eigen::SparseMatrix<double>;

struct LinearSystem {
  SparseMatrix hessian;
  Eigen::VectorXd gradient;
};

LinearSystem build_system(const std::map<NodeId, GraphNode> &nodes, const std::vector<Constraint> &constraints,
                          const std::unordered_map<NodeId, Eigen::Index> &slot) {
  const auto dim = static_cast<Eigen::Index>(6 * slot.size());
  // block accumulation keyed by (row slot, col slot), lower slots first
  std::map<std::pair<Eigen::Index, Eigen::Index>, Matrix6d> blocks;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);

  for (const auto &c : constraints) {
    const auto &xi = nodes.at(c.from);
    const auto &xj = nodes.at(c.to);
    if (xi.fixed && xj.fixed) continue;
    const Vector6d e = edge_error(xi.pose, xj.pose, c.measurement).vector();
    const auto [ji, jj] = edge_error_jacobians(xi.pose, xj.pose, c.measurement);
    const Vector6d oe = c.information * e;

    std::pair<Eigen::Index, const Matrix6d *> terms[2];
    int n = 0;
    if (!xi.fixed) terms[n++] = {slot.at(c.from), &ji};
    if (!xj.fixed) terms[n++] = {slot.at(c.to), &jj};
    for (int a = 0; a < n; ++a) {
      const auto &[sa, ja] = terms[a];
      g.segment<6>(6 * sa) += ja->transpose() * oe;
      for (int b = 0; b < n; ++b) {
        const auto &[sb, jb] = terms[b];
        auto [it, inserted] = blocks.try_emplace({sa, sb}, Matrix6d::Zero());
        it->second += ja->transpose() * c.information * (*jb);
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(blocks.size() * 36);
  for (const auto &[key, block] : blocks) {
    for (int r = 0; r < 6; ++r) {
      for (int col = 0; col < 6; ++col) {
        triplets.emplace_back(6 * key.first + r, 6 * key.second + col, block(r, col));
      }
    }
  }
  LinearSystem sys;
  sys.hessian.resize(dim, dim);
  sys.hessian.setFromTriplets(triplets.begin(), triplets.end());
  sys.gradient = std::move(g);
  return sys;
}

void write_pose(std::ostream &os, const Pose &p) {
  const Eigen::Quaterniond q = p.quaternion().normalized();
  os << format_number(p.translation().x()) << ' ' << format_number(p.translation().y()) << ' '
     << format_number(p.translation().z()) << ' ' << format_number(q.x()) << ' ' << format_number(q.y()) << ' '
     << format_number(q.z()) << ' ' << format_number(q.w());
}

Pose read_pose(std::istringstream &is) {
  double v[7];
  for (double &x : v) {
    std::string tok;
    if (!(is >> tok)) throw GraphError("graph dump: truncated pose");
    x = parse_number(tok);
  }
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  return {q.normalized().toRotationMatrix(), Eigen::Vector3d(v[0], v[1], v[2])};
}

}  // namespace

Twist edge_error(const Pose &x_i, const Pose &x_j, const Pose &z_ij) {
  return se3::log(inverse(z_ij) * (inverse(x_j) * x_i));
}

std::pair<Matrix6d, Matrix6d> edge_error_jacobians(const Pose &x_i, const Pose &x_j, const Pose &z_ij) {
  const Twist e = edge_error(x_i, x_j, z_ij);
  const Matrix6d jr_inv = se3::right_jacobian_inverse(e);
  return {jr_inv, -jr_inv * se3::adjoint(inverse(x_i) * x_j)};
}

void PoseGraph::add_node(NodeId id, const Pose &pose, bool fixed) {
  if (!nodes_.try_emplace(id, GraphNode{id, pose, fixed}).second) {
    throw GraphError("add_node: node " + std::to_string(id) + " already exists");
  }
}

void PoseGraph::fix_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw GraphError("fix_node: unknown node " + std::to_string(id));
  it->second.fixed = true;
}

void PoseGraph::set_pose(NodeId id, const Pose &pose) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw GraphError("set_pose: unknown node " + std::to_string(id));
  it->second.pose = pose;
}

void PoseGraph::add_constraint(const Constraint &c) {
  if (!contains(c.from) || !contains(c.to)) throw GraphError("add_constraint: unknown endpoint");
  if (c.from == c.to) throw GraphError("add_constraint: self loop");
  if ((c.information - c.information.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw GraphError("add_constraint: information matrix is not symmetric");
  }
  constraints_.push_back(c);
}

bool PoseGraph::referenced(NodeId id) const {
  return std::any_of(constraints_.begin(), constraints_.end(),
                     [id](const Constraint &c) { return c.from == id || c.to == id; });
}

void PoseGraph::remove_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw GraphError("remove_node: unknown node " + std::to_string(id));
  if (!it->second.fixed) throw GraphError("remove_node: node " + std::to_string(id) + " is still active");
  if (referenced(id)) throw GraphError("remove_node: node " + std::to_string(id) + " is still constrained");
  nodes_.erase(it);
}

std::size_t PoseGraph::drop_fixed_constraints() {
  const auto before = constraints_.size();
  std::erase_if(constraints_,
                [this](const Constraint &c) { return nodes_.at(c.from).fixed && nodes_.at(c.to).fixed; });
  return before - constraints_.size();
}

const GraphNode &PoseGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw GraphError("node: unknown node " + std::to_string(id));
  return it->second;
}

std::size_t PoseGraph::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const auto &kv) { return !kv.second.fixed; }));
}

double PoseGraph::chi2() const {
  double sum = 0.0;
  for (const auto &c : constraints_) {
    const Vector6d e = edge_error(nodes_.at(c.from).pose, nodes_.at(c.to).pose, c.measurement).vector();
    sum += e.dot(c.information * e);
  }
  return sum;
}

OptimizationSummary PoseGraph::optimize(int iterations, const LmSettings &settings) {
  if (std::none_of(nodes_.begin(), nodes_.end(), [](const auto &kv) { return kv.second.fixed; })) {
    throw GraphError("optimize: at least one node must be fixed");
  }

  OptimizationSummary summary;
  summary.initial_chi2 = summary.final_chi2 = chi2();
  summary.chi2_history.push_back(summary.initial_chi2);

  std::unordered_map<NodeId, Eigen::Index> slot;
  std::vector<NodeId> active;
  for (const auto &[id, n] : nodes_) {
    if (n.fixed) continue;
    slot.emplace(id, static_cast<Eigen::Index>(active.size()));
    active.push_back(id);
  }
  if (active.empty() || constraints_.empty()) return summary;

  const auto original = nodes_;
  double chi = summary.initial_chi2;
  double lambda = settings.initial_lambda;
  bool relinearize = true;
  LinearSystem sys;
  Eigen::VectorXd damping;
  Eigen::SimplicialLDLT<SparseMatrix> solver;

  while (summary.iterations < iterations) {
    if (relinearize) {
      sys = build_system(nodes_, constraints_, slot);
      if (sys.gradient.lpNorm<Eigen::Infinity>() == 0.0) break;
      damping = sys.hessian.diagonal();
      const double floor = std::max(1e-9 * damping.maxCoeff(), 1e-12);
      damping = damping.cwiseMax(floor);
      relinearize = false;
    }
    ++summary.iterations;

    SparseMatrix damped = sys.hessian;
    for (Eigen::Index k = 0; k < damped.rows(); ++k) damped.coeffRef(k, k) += lambda * damping[k];
    solver.compute(damped);
    Eigen::VectorXd step;
    if (solver.info() == Eigen::Success) step = solver.solve(-sys.gradient);
    if (solver.info() != Eigen::Success || !step.allFinite()) {
      lambda *= settings.lambda_factor;
      if (lambda > settings.max_lambda) {
        nodes_ = original;
        throw UnrecoverableGeometry("optimize: damped system stayed singular");
      }
      continue;
    }

    auto candidate = nodes_;
    for (std::size_t k = 0; k < active.size(); ++k) {
      auto &n = candidate.at(active[k]);
      n.pose = n.pose * se3::exp(Twist::FromVector(step.segment<6>(static_cast<Eigen::Index>(6 * k))));
    }
    double candidate_chi = 0.0;
    for (const auto &c : constraints_) {
      const Vector6d e =
          edge_error(candidate.at(c.from).pose, candidate.at(c.to).pose, c.measurement).vector();
      candidate_chi += e.dot(c.information * e);
    }

    if (candidate_chi < chi) {
      nodes_ = std::move(candidate);
      chi = candidate_chi;
      ++summary.accepted;
      summary.chi2_history.push_back(chi);
      lambda = std::max(lambda / settings.lambda_factor, 1e-12);
      relinearize = true;
      if (step.lpNorm<Eigen::Infinity>() < 1e-14) break;
    } else {
      lambda *= settings.lambda_factor;
      if (lambda > settings.max_lambda) break;  // no descent left at any damping
    }
  }
  summary.final_chi2 = chi;
  return summary;
}

void PoseGraph::write(std::ostream &os) const {
  for (const auto &[id, n] : nodes_) {
    os << "NODE " << id << ' ';
    write_pose(os, n.pose);
    os << ' ' << (n.fixed ? 1 : 0) << '\n';
  }
  for (const auto &c : constraints_) {
    os << "EDGE " << c.from << ' ' << c.to << ' ';
    write_pose(os, c.measurement);
    for (int r = 0; r < 6; ++r) {
      for (int col = r; col < 6; ++col) os << ' ' << format_number(c.information(r, col));
    }
    os << '\n';
  }
}

PoseGraph PoseGraph::read(std::istream &is) {
  PoseGraph g;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "NODE") {
      NodeId id = 0;
      int fixed = 0;
      ls >> id;
      const Pose p = read_pose(ls);
      ls >> fixed;
      if (!ls) throw GraphError("graph dump: malformed NODE line");
      g.add_node(id, p, fixed != 0);
    } else if (tag == "EDGE") {
      Constraint c;
      ls >> c.from >> c.to;
      c.measurement = read_pose(ls);
      for (int r = 0; r < 6; ++r) {
        for (int col = r; col < 6; ++col) {
          std::string tok;
          if (!(ls >> tok)) throw GraphError("graph dump: truncated information matrix");
          c.information(r, col) = c.information(col, r) = parse_number(tok);
        }
      }
      g.add_constraint(c);
    } else {
      throw GraphError("graph dump: unknown record '" + tag + "'");
    }
  }
  return g;
}

}  // namespace scanweave
