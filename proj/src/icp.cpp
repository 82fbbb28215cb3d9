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

#include "scanweave/icp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace scanweave {

namespace {

constexpr double kMaxConditionNumber = 1e12;

struct NormalEquations {
  Matrix6d hessian = Matrix6d::Zero();
  Vector6d gradient = Vector6d::Zero();
};

NormalEquations accumulate(std::span<const Correspondence> corrs, double tau) {
  NormalEquations ne;
  for (const auto &c : corrs) {
    const Eigen::Vector3d r = c.a - c.b;
    const double w = robust_weight(r.norm(), tau);
    const PointJacobian j = point_jacobian(c.a);
    ne.hessian.noalias() += w * j.transpose() * j;
    ne.gradient.noalias() += w * j.transpose() * r;
  }
  return ne;
}

}  // namespace

double robust_kernel(double e, double tau) {
  const double e2 = e * e;
  return 0.5 * e2 / (tau + e2);
}

double robust_weight(double e, double tau) {
  const double d = tau + e * e;
  return tau / (d * d);
}

PointJacobian point_jacobian(const Point3 &a) {
  PointJacobian j;
  j.leftCols<3>().setIdentity();
  j.rightCols<3>() = -hat(a);
  return j;
}

std::vector<Correspondence> find_correspondences(std::span<const Point3> source, const SpatialIndex &index,
                                                 double d_max) {
  std::vector<Correspondence> corrs;
  corrs.reserve(source.size());
  for (const auto &a : source) {
    if (const auto nn = index.nearest(a, d_max)) {
      corrs.push_back({a, index.points()[nn->index], nn->distance});
    }
  }
  return corrs;
}

double robust_cost(std::span<const Correspondence> corrs, double tau, const Pose &transform) {
  double cost = 0.0;
  for (const auto &c : corrs) cost += robust_kernel((transform * c.a - c.b).norm(), tau);
  return cost;
}

Twist gauss_newton_step(std::span<const Correspondence> corrs, double tau) {
  const NormalEquations ne = accumulate(corrs, tau);
  const Eigen::SelfAdjointEigenSolver<Matrix6d> eig(ne.hessian, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    throw DegenerateGeometry("gauss_newton_step: normal matrix is singular or ill-conditioned");
  }
  const Vector6d xi = -ne.hessian.ldlt().solve(ne.gradient);
  return Twist::FromVector(xi);
}

Matrix6d information_matrix(std::span<const Correspondence> corrs, double tau) {
  const Matrix6d h = accumulate(corrs, tau).hessian;
  return 0.5 * (h + h.transpose());
}

RegistrationResult icp(std::span<const Point3> source, const SpatialIndex &index, const IcpParams &params) {
  RegistrationResult result;
  PointList moved(source.begin(), source.end());
  std::vector<Correspondence> corrs;
  Pose delta;

  for (int iter = 1; iter <= params.max_iters; ++iter) {
    result.iterations = iter;
    corrs = find_correspondences(moved, index, params.d_max);
    result.final_correspondences = corrs.size();
    if (corrs.size() < params.min_corrs) {
      result.status = IcpStatus::Aborted;
      return result;
    }
    const Twist xi = gauss_newton_step(corrs, params.tau);
    const Pose increment = se3::exp(xi);
    for (auto &p : moved) p = increment * p;
    delta = increment * delta;
    if (xi.norm() < params.conv_eps) {
      result.status = IcpStatus::Converged;
      break;
    }
    result.status = IcpStatus::IterationLimit;
  }

  result.delta = delta;
  result.information = information_matrix(corrs, params.tau);
  return result;
}

}  // namespace scanweave
