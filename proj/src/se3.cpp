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

#include "scanweave/se3.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace scanweave {

namespace {

constexpr double kOrthoTolerance = 1e-9;
constexpr double kSmallAngle = 1e-1;
constexpr double kPiTolerance = 1e-10;

bool needs_orthonormalization(const Eigen::Matrix3d &r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > kOrthoTolerance ||
         std::abs(r.determinant() - 1.0) > kOrthoTolerance;
}

// Series-safe coefficients of the SO(3)/SE(3) closed forms.
// a = sin(t)/t, b = (1 - cos t)/t^2, c = (t - sin t)/t^3
struct RotationCoefficients {
  double a, b, c;
};

RotationCoefficients coefficients(double theta) {
  const double t2 = theta * theta;
  if (theta < kSmallAngle) {
    const double t4 = t2 * t2;
    return {1.0 - t2 / 6.0 + t4 / 120.0 - t4 * t2 / 5040.0,
            0.5 - t2 / 24.0 + t4 / 720.0 - t4 * t2 / 40320.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t4 * t2 / 362880.0};
  }
  return {std::sin(theta) / theta, (1.0 - std::cos(theta)) / t2, (theta - std::sin(theta)) / (t2 * theta)};
}

// Barfoot's Q block of the SE(3) left Jacobian.
Eigen::Matrix3d q_block(const Eigen::Vector3d &rho, const Eigen::Vector3d &phi) {
  const double theta = phi.norm();
  const double t2 = theta * theta;
  double c1, c2, c3;
  if (theta < kSmallAngle) {
    const double t4 = t2 * t2;
    c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
    c2 = -1.0 / 24.0 + t2 / 720.0 - t4 / 40320.0;
    const double d = -1.0 / 120.0 + t2 / 5040.0 - t4 / 362880.0;
    c3 = 0.5 * (c2 - 3.0 * d);
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    c1 = (theta - s) / (t2 * theta);
    c2 = (1.0 - t2 / 2.0 - c) / (t2 * t2);
    c3 = 0.5 * (c2 - 3.0 * (theta - s - t2 * theta / 6.0) / (t2 * t2 * theta));
  }
  const Eigen::Matrix3d R = hat(rho);
  const Eigen::Matrix3d P = hat(phi);
  const Eigen::Matrix3d PR = P * R;
  const Eigen::Matrix3d RP = R * P;
  const Eigen::Matrix3d PRP = PR * P;
  return 0.5 * R + c1 * (PR + RP + PRP) - c2 * (P * PR + RP * P - 3.0 * PRP) - c3 * (PRP * P + P * PRP);
}

}  // namespace

Pose::Pose(const Eigen::Matrix3d &rotation, const Eigen::Vector3d &translation)
    : rotation_(rotation), translation_(translation) {}

Pose Pose::FromMatrix(const Eigen::Matrix4d &m) {
  Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if (needs_orthonormalization(r)) r = orthonormalize(r);
  return {r, m.topRightCorner<3, 1>()};
}

Pose Pose::FromYaw(double yaw, const Eigen::Vector3d &t) {
  return {Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d &r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Pose compose(const Pose &a, const Pose &b) {
  Eigen::Matrix3d r = a.rotation() * b.rotation();
  if (needs_orthonormalization(r)) r = orthonormalize(r);
  return {r, a.rotation() * b.translation() + a.translation()};
}

Pose inverse(const Pose &p) {
  const Eigen::Matrix3d rt = p.rotation().transpose();
  return {rt, -(rt * p.translation())};
}

Eigen::Matrix3d hat(const Eigen::Vector3d &v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

namespace se3 {

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d &phi) {
  const auto k = coefficients(phi.norm());
  const Eigen::Matrix3d P = hat(phi);
  return Eigen::Matrix3d::Identity() + k.b * P + k.c * P * P;
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d &phi) {
  const double theta = phi.norm();
  const double t2 = theta * theta;
  double d;
  if (theta < kSmallAngle) {
    d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    d = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / t2;
  }
  const Eigen::Matrix3d P = hat(phi);
  return Eigen::Matrix3d::Identity() - 0.5 * P + d * P * P;
}

Pose exp(const Twist &xi) {
  const auto k = coefficients(xi.phi.norm());
  const Eigen::Matrix3d P = hat(xi.phi);
  const Eigen::Matrix3d PP = P * P;
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + k.a * P + k.b * PP;
  const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + k.b * P + k.c * PP;
  return {r, v * xi.rho};
}

Twist log(const Pose &p) {
  const Eigen::AngleAxisd aa(p.rotation());
  const double theta = aa.angle();
  if (M_PI - theta < kPiTolerance) {
    throw DegenerateRotation("se3::log: rotation angle is pi, axis sign is ambiguous");
  }
  Twist xi;
  xi.phi = theta * aa.axis();
  if (theta == 0.0) xi.phi.setZero();
  xi.rho = so3_left_jacobian_inverse(xi.phi) * p.translation();
  return xi;
}

Pose interpolate(const Pose &p, double s) {
  const Twist xi = log(p);
  return exp({s * xi.rho, s * xi.phi});
}

Matrix6d adjoint(const Pose &p) {
  Matrix6d ad = Matrix6d::Zero();
  ad.topLeftCorner<3, 3>() = p.rotation();
  ad.topRightCorner<3, 3>() = hat(p.translation()) * p.rotation();
  ad.bottomRightCorner<3, 3>() = p.rotation();
  return ad;
}

Matrix6d left_jacobian(const Twist &xi) {
  Matrix6d j = Matrix6d::Zero();
  const Eigen::Matrix3d jr = so3_left_jacobian(xi.phi);
  j.topLeftCorner<3, 3>() = jr;
  j.bottomRightCorner<3, 3>() = jr;
  j.topRightCorner<3, 3>() = q_block(xi.rho, xi.phi);
  return j;
}

Matrix6d left_jacobian_inverse(const Twist &xi) {
  Matrix6d j = Matrix6d::Zero();
  const Eigen::Matrix3d ji = so3_left_jacobian_inverse(xi.phi);
  j.topLeftCorner<3, 3>() = ji;
  j.bottomRightCorner<3, 3>() = ji;
  j.topRightCorner<3, 3>() = -ji * q_block(xi.rho, xi.phi) * ji;
  return j;
}

Matrix6d right_jacobian_inverse(const Twist &xi) { return left_jacobian_inverse({-xi.rho, -xi.phi}); }

double rotation_angle(const Pose &p) {
  const double c = std::clamp(0.5 * (p.rotation().trace() - 1.0), -1.0, 1.0);
  const double s = 0.5 * Eigen::Vector3d(p.rotation()(2, 1) - p.rotation()(1, 2),
                                         p.rotation()(0, 2) - p.rotation()(2, 0),
                                         p.rotation()(1, 0) - p.rotation()(0, 1))
                             .norm();
  return std::atan2(s, c);
}

}  // namespace se3

}  // namespace scanweave
