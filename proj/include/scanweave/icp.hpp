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
 * \file icp.hpp
 * \brief Robust point-to-point ICP with a Hessian information estimate.
 *
 * The robust kernel is rho(e) = (e^2 / 2) / (tau + e^2). Each Gauss-Newton
 * solve uses IRLS weights w(e) = rho'(e) / e = tau / (tau + e^2)^2.
 *
 * Increments are applied on the left of the already-transformed source, so
 * the residual of a correspondence (a, b) under exp(xi) is exp(xi) * a - b
 * with Jacobian [I | -a^] at xi = 0.
 */
#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "scanweave/kdtree.hpp"
#include "scanweave/se3.hpp"

namespace scanweave {

class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Correspondence {
  Point3 a;  // source
  Point3 b;  // target
  double dist = 0.0;
};

struct IcpParams {
  double d_max = 3.0;
  double tau = 1.0 / 3.0;
  double conv_eps = 1e-5;
  int max_iters = 100;
  std::size_t min_corrs = 200;
};

enum class IcpStatus {
  Converged,
  IterationLimit,  // ran max_iters without meeting conv_eps; result still usable
  Aborted,         // too few correspondences at some iteration
};

struct RegistrationResult {
  IcpStatus status = IcpStatus::Aborted;
  Pose delta;
  Matrix6d information = Matrix6d::Zero();
  int iterations = 0;
  std::size_t final_correspondences = 0;

  bool usable() const { return status != IcpStatus::Aborted; }
};

using PointJacobian = Eigen::Matrix<double, 3, 6>;

double robust_kernel(double e, double tau);
double robust_weight(double e, double tau);

/// d/dxi of exp(xi) * a at xi = 0.
PointJacobian point_jacobian(const Point3 &a);

std::vector<Correspondence> find_correspondences(std::span<const Point3> source, const SpatialIndex &index,
                                                 double d_max);

/// Sum of rho(|T * a - b|) over the set.
double robust_cost(std::span<const Correspondence> corrs, double tau, const Pose &transform = Pose::Identity());

/// Throws DegenerateGeometry when the weighted normal matrix has condition number above 1e12.
Twist gauss_newton_step(std::span<const Correspondence> corrs, double tau);

/// Weighted Gauss-Newton Hessian sum_i w(e_i) J_i^T J_i, symmetrized.
Matrix6d information_matrix(std::span<const Correspondence> corrs, double tau);

/// Aligns `source` to the indexed target. The returned delta maps the given
/// source coordinates onto the target. information is expressed for a left
/// perturbation of the aligned pose in the target frame.
RegistrationResult icp(std::span<const Point3> source, const SpatialIndex &index, const IcpParams &params);

}  // namespace scanweave
