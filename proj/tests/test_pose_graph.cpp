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

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "test_util.hpp"

using namespace scanweave;
using scanweave::testing::random_pose;

namespace {

Matrix6d random_information(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix6d a;
  for (int i = 0; i < 36; ++i) a(i) = u(rng);
  return a * a.transpose() + 0.5 * Matrix6d::Identity();
}

Pose perturbation(std::mt19937_64 &rng, double max_t, double max_angle) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Vector3d t = u(rng) * max_t * scanweave::testing::random_vector(rng, 1.0).normalized();
  return se3::exp({t, scanweave::testing::random_rotation_vector(rng, max_angle)});
}

bool bit_identical(const Pose &a, const Pose &b) {
  return std::memcmp(a.rotation().data(), b.rotation().data(), sizeof(double) * 9) == 0 &&
         std::memcmp(a.translation().data(), b.translation().data(), sizeof(double) * 3) == 0;
}

// Graph over `truth` with every listed edge consistent; node 0 fixed, the
// others perturbed.
PoseGraph consistent_graph(const std::vector<Pose> &truth, const std::vector<std::pair<NodeId, NodeId>> &edges,
                           std::mt19937_64 &rng, double max_t, double max_angle) {
  PoseGraph g;
  for (NodeId i = 0; i < truth.size(); ++i) {
    g.add_node(i, i == 0 ? truth[i] : truth[i] * perturbation(rng, max_t, max_angle), i == 0);
  }
  for (const auto &[from, to] : edges) {
    g.add_constraint({from, to, inverse(truth[to]) * truth[from], random_information(rng)});
  }
  return g;
}

std::vector<Pose> random_trajectory(std::mt19937_64 &rng, std::size_t n) {
  std::vector<Pose> poses{Pose::Identity()};
  for (std::size_t i = 1; i < n; ++i) poses.push_back(poses.back() * random_pose(rng, 2.0, 0.5));
  return poses;
}

}  // namespace

TEST(EdgeError, Examples) {
  std::mt19937_64 rng(51);
  const Pose xj = random_pose(rng), z = random_pose(rng);
  EXPECT_LT(edge_error(xj * z, xj, z).norm(), 1e-9);
  EXPECT_LT(edge_error(xj, xj, Pose::Identity()).norm(), 1e-12);

  // 0.1 m past consistency along the measurement's own x axis
  const Twist e = edge_error(xj * z * Pose::FromTranslation({0.1, 0, 0}), xj, z);
  Vector6d expected = Vector6d::Zero();
  expected[0] = 0.1;
  EXPECT_LT((e.vector() - expected).norm(), 1e-9);
}

TEST(EdgeError, JacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(52);
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const Pose xi = random_pose(rng), xj = random_pose(rng);
    const Pose z = inverse(xj) * xi * perturbation(rng, 0.5, 0.5);
    const auto [ji, jj] = edge_error_jacobians(xi, xj, z);
    Matrix6d fd_i, fd_j;
    for (int c = 0; c < 6; ++c) {
      Vector6d d = Vector6d::Zero();
      d[c] = h;
      const Pose p = se3::exp(Twist::FromVector(d)), m = se3::exp(Twist::FromVector(-d));
      fd_i.col(c) = (edge_error(xi * p, xj, z).vector() - edge_error(xi * m, xj, z).vector()) / (2 * h);
      fd_j.col(c) = (edge_error(xi, xj * p, z).vector() - edge_error(xi, xj * m, z).vector()) / (2 * h);
    }
    EXPECT_LT((fd_i - ji).norm(), 1e-5 * fd_i.norm()) << "k=" << k;
    EXPECT_LT((fd_j - jj).norm(), 1e-5 * fd_j.norm()) << "k=" << k;
  }
}

TEST(Chi2, Examples) {
  PoseGraph g;
  g.add_node(0, Pose::Identity(), true);
  g.add_node(1, Pose::FromTranslation({1.1, 0, 0}));
  EXPECT_EQ(g.chi2(), 0.0);
  g.add_constraint({1, 0, Pose::FromTranslation({1, 0, 0}), Matrix6d::Identity()});
  EXPECT_NEAR(g.chi2(), 0.01, 1e-12);
}

TEST(Chi2, MatchesPerEdgeSum) {
  std::mt19937_64 rng(53);
  PoseGraph g;
  std::vector<Pose> poses;
  for (NodeId i = 0; i < 5; ++i) {
    poses.push_back(random_pose(rng));
    g.add_node(i, poses.back(), i == 0);
  }
  double expected = 0.0;
  for (NodeId i = 1; i < 5; ++i) {
    for (NodeId j = 0; j < i; ++j) {
      const Pose z = random_pose(rng, 1.0, 0.5);
      const Matrix6d info = random_information(rng);
      g.add_constraint({i, j, z, info});
      const Eigen::Matrix4d m = z.matrix().inverse() * poses[j].matrix().inverse() * poses[i].matrix();
      const Vector6d e = se3::log(Pose::FromMatrix(m)).vector();
      expected += e.dot(info * e);
    }
  }
  EXPECT_NEAR(g.chi2(), expected, 1e-9 * expected);
}

TEST(Optimize, GroundTruthIsStationary) {
  std::mt19937_64 rng(54);
  const auto truth = random_trajectory(rng, 6);
  PoseGraph g = consistent_graph(truth, {{1, 0}, {2, 1}, {3, 2}, {4, 3}, {5, 4}, {3, 1}}, rng, 0.0, 0.0);
  const auto summary = g.optimize(15);
  EXPECT_LT(summary.final_chi2, 1e-18);
  for (NodeId i = 0; i < truth.size(); ++i) {
    EXPECT_LT(scanweave::testing::translation_error(g.node(i).pose, truth[i]), 1e-12);
  }
}

TEST(Optimize, ChainRecoversPerturbedMiddle) {
  PoseGraph g;
  const Pose x0, x1 = Pose::FromYaw(0.2, {1, 0, 0}), x2 = Pose::FromYaw(0.4, {2, 0.3, 0});
  g.add_node(0, x0, true);
  g.add_node(1, x1 * Pose::FromTranslation({0.5, 0, 0}));
  g.add_node(2, x2, true);
  g.add_constraint({1, 0, inverse(x0) * x1, Matrix6d::Identity()});
  g.add_constraint({2, 1, inverse(x1) * x2, Matrix6d::Identity()});
  const auto summary = g.optimize(15);
  EXPECT_LE(summary.iterations, 15);
  EXPECT_LT(scanweave::testing::translation_error(g.node(1).pose, x1), 1e-6);
}

TEST(Optimize, TriangleDecreasesMonotonically) {
  std::mt19937_64 rng(55);
  const auto truth = random_trajectory(rng, 3);
  PoseGraph g = consistent_graph(truth, {{1, 0}, {2, 1}, {2, 0}}, rng, 0.5, 5.0 * M_PI / 180.0);
  const auto summary = g.optimize(15);
  for (std::size_t k = 1; k < summary.chi2_history.size(); ++k) {
    EXPECT_LT(summary.chi2_history[k], summary.chi2_history[k - 1]);
  }
  EXPECT_LT(summary.final_chi2, 1e-12);
}

TEST(Optimize, ConsistentGraphsReachZero) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 18;
    const auto truth = random_trajectory(rng, n);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 1; i < n; ++i) {
      edges.emplace_back(i, i - 1);
      if (trial % 2 == 1 && i >= 2) edges.emplace_back(i, i - 2);  // triangles
    }
    PoseGraph g = consistent_graph(truth, edges, rng, 0.5, 5.0 * M_PI / 180.0);
    const double before = g.chi2();
    const auto summary = g.optimize(15);
    EXPECT_LE(summary.final_chi2, before);
    EXPECT_LT(summary.final_chi2, 1e-10) << "trial " << trial << " n=" << n;
    for (std::size_t k = 1; k < summary.chi2_history.size(); ++k) {
      EXPECT_LE(summary.chi2_history[k], summary.chi2_history[k - 1]);
    }
  }
}

TEST(Optimize, FixedNodesAreBitIdentical) {
  std::mt19937_64 rng(57);
  const auto truth = random_trajectory(rng, 8);
  PoseGraph g = consistent_graph(truth, {{1, 0}, {2, 1}, {3, 2}, {4, 3}, {5, 4}, {6, 5}, {7, 6}, {4, 2}}, rng, 0.5,
                                 0.1);
  g.fix_node(3);
  g.set_pose(3, truth[3] * perturbation(rng, 0.2, 0.05));
  const Pose f0 = g.node(0).pose, f3 = g.node(3).pose;
  g.optimize(15);
  EXPECT_TRUE(bit_identical(g.node(0).pose, f0));
  EXPECT_TRUE(bit_identical(g.node(3).pose, f3));
}

TEST(Optimize, RequiresGauge) {
  PoseGraph g;
  g.add_node(0, Pose::Identity());
  g.add_node(1, Pose::FromTranslation({1, 0, 0}));
  g.add_constraint({1, 0, Pose::FromTranslation({1, 0, 0}), Matrix6d::Identity()});
  EXPECT_THROW(g.optimize(15), GraphError);
}

TEST(Optimize, BudgetCountsRejectedSolves) {
  std::mt19937_64 rng(58);
  const auto truth = random_trajectory(rng, 10);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 1; i < 10; ++i) edges.emplace_back(i, i - 1);
  PoseGraph g = consistent_graph(truth, edges, rng, 0.5, 0.1);
  const auto summary = g.optimize(3);
  EXPECT_LE(summary.iterations, 3);
  EXPECT_LE(summary.accepted, summary.iterations);
  EXPECT_EQ(summary.chi2_history.size(), static_cast<std::size_t>(summary.accepted) + 1);
}

TEST(Gauge, RigidTransformLeavesErrorsUnchanged) {
  std::mt19937_64 rng(59);
  for (int k = 0; k < 100; ++k) {
    const Pose xi = random_pose(rng), xj = random_pose(rng), z = random_pose(rng, 2.0, 1.0), g = random_pose(rng);
    EXPECT_LT((edge_error(g * xi, g * xj, z).vector() - edge_error(xi, xj, z).vector()).norm(), 1e-9);
  }
}

TEST(Structure, ConstraintValidation) {
  PoseGraph g;
  g.add_node(0, Pose::Identity(), true);
  g.add_node(1, Pose::Identity());
  EXPECT_THROW(g.add_node(1, Pose::Identity()), GraphError);
  EXPECT_THROW(g.add_constraint({1, 7, Pose::Identity(), Matrix6d::Identity()}), GraphError);
  EXPECT_THROW(g.add_constraint({1, 1, Pose::Identity(), Matrix6d::Identity()}), GraphError);
  Matrix6d asym = Matrix6d::Identity();
  asym(0, 1) = 1e-3;
  EXPECT_THROW(g.add_constraint({1, 0, Pose::Identity(), asym}), GraphError);
  EXPECT_TRUE(g.constraints().empty());
}

TEST(Structure, RemoveNodeRules) {
  PoseGraph g;
  g.add_node(0, Pose::Identity(), true);
  g.add_node(1, Pose::FromTranslation({1, 0, 0}));
  g.add_node(2, Pose::FromTranslation({2, 0, 0}), true);
  g.add_constraint({1, 0, Pose::FromTranslation({1, 0, 0}), Matrix6d::Identity()});

  EXPECT_THROW(g.remove_node(1), GraphError);  // active
  EXPECT_THROW(g.remove_node(0), GraphError);  // still referenced
  EXPECT_THROW(g.remove_node(9), GraphError);

  std::ostringstream before;
  g.write(before);
  g.add_node(5, Pose::FromTranslation({5, 0, 0}), true);
  g.remove_node(5);
  std::ostringstream after;
  g.write(after);
  EXPECT_EQ(before.str(), after.str());
  EXPECT_EQ(g.active_count(), 1u);
}

TEST(Structure, DropFixedConstraints) {
  PoseGraph g;
  g.add_node(0, Pose::Identity(), true);
  g.add_node(1, Pose::FromTranslation({1, 0, 0}));
  g.add_node(2, Pose::FromTranslation({2, 0, 0}));
  g.add_constraint({1, 0, Pose::FromTranslation({1, 0, 0}), Matrix6d::Identity()});
  g.add_constraint({2, 1, Pose::FromTranslation({1, 0, 0}), Matrix6d::Identity()});
  g.fix_node(1);
  EXPECT_EQ(g.drop_fixed_constraints(), 1u);
  ASSERT_EQ(g.constraints().size(), 1u);
  EXPECT_EQ(g.constraints()[0].from, 2u);
  EXPECT_FALSE(g.referenced(0));
  g.remove_node(0);
  EXPECT_FALSE(g.contains(0));
}

TEST(Dump, RoundTrip) {
  std::mt19937_64 rng(60);
  const auto truth = random_trajectory(rng, 5);
  PoseGraph g = consistent_graph(truth, {{1, 0}, {2, 1}, {3, 2}, {4, 3}, {4, 1}}, rng, 0.3, 0.1);
  std::stringstream ss;
  g.write(ss);
  const PoseGraph back = PoseGraph::read(ss);
  ASSERT_EQ(back.nodes().size(), g.nodes().size());
  ASSERT_EQ(back.constraints().size(), g.constraints().size());
  for (const auto &[id, n] : g.nodes()) {
    EXPECT_EQ(back.node(id).fixed, n.fixed);
    EXPECT_LT(scanweave::testing::translation_error(back.node(id).pose, n.pose), 1e-12);
    EXPECT_LT(scanweave::testing::rotation_error(back.node(id).pose, n.pose), 1e-12);
  }
  for (std::size_t k = 0; k < g.constraints().size(); ++k) {
    EXPECT_EQ(back.constraints()[k].information, g.constraints()[k].information);
  }
  EXPECT_NEAR(back.chi2(), g.chi2(), 1e-9 * g.chi2());
}

TEST(Dump, Format) {
  PoseGraph g;
  g.add_node(0, Pose::FromTranslation({1, 2, 3}), true);
  g.add_node(1, Pose::Identity());
  g.add_constraint({1, 0, Pose::Identity(), Matrix6d::Identity()});
  std::ostringstream os;
  g.write(os);
  EXPECT_EQ(os.str(),
            "NODE 0 1 2 3 0 0 0 1 1\n"
            "NODE 1 0 0 0 0 0 0 1 0\n"
            "EDGE 1 0 0 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1\n");
  std::istringstream bad("NODE 0 1 2\n");
  EXPECT_THROW(PoseGraph::read(bad), GraphError);
}
