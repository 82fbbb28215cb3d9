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
 * \file se3.hpp
 * \brief Rigid-body transforms and the SE(3) exponential/logarithm maps.
 *
 * A Pose maps body-frame coordinates into the world frame. compose(a, b) is
 * the homogeneous matrix product a * b. Twists are ordered (rho, phi):
 * translational part first, rotational part second.
 */
#pragma once

#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace scanweave {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Thrown by se3::log when the rotation angle is (numerically) pi.
class DegenerateRotation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Twist {
  Eigen::Vector3d rho = Eigen::Vector3d::Zero();  // meters
  Eigen::Vector3d phi = Eigen::Vector3d::Zero();  // radians

  static Twist Zero() { return {}; }
  static Twist FromVector(const Vector6d &v) { return {v.head<3>(), v.tail<3>()}; }
  Vector6d vector() const {
    Vector6d v;
    v << rho, phi;
    return v;
  }
  double norm() const { return vector().norm(); }
};

class Pose {
 public:
  Pose() = default;
  Pose(const Eigen::Matrix3d &rotation, const Eigen::Vector3d &translation);

  static Pose Identity() { return {}; }
  static Pose FromTranslation(const Eigen::Vector3d &t) { return {Eigen::Matrix3d::Identity(), t}; }
  static Pose FromMatrix(const Eigen::Matrix4d &m);
  /// Rotation about +z by `yaw` radians followed by translation `t`.
  static Pose FromYaw(double yaw, const Eigen::Vector3d &t = Eigen::Vector3d::Zero());

  const Eigen::Matrix3d &rotation() const { return rotation_; }
  const Eigen::Vector3d &translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;
  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation_); }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

Pose compose(const Pose &a, const Pose &b);
Pose inverse(const Pose &p);
inline Eigen::Vector3d transform_point(const Pose &p, const Eigen::Vector3d &q) {
  return p.rotation() * q + p.translation();
}

inline Pose operator*(const Pose &a, const Pose &b) { return compose(a, b); }
inline Eigen::Vector3d operator*(const Pose &p, const Eigen::Vector3d &q) { return transform_point(p, q); }

/// Nearest rotation matrix in the Frobenius sense (polar decomposition).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d &r);

Eigen::Matrix3d hat(const Eigen::Vector3d &v);

namespace se3 {

Pose exp(const Twist &xi);
/// Throws DegenerateRotation when the rotation angle is within 1e-10 of pi.
Twist log(const Pose &p);

/// exp(s * log(p)). Values of s outside [0, 1] extrapolate along the same geodesic.
Pose interpolate(const Pose &p, double s);

/// Ad(T) such that T * exp(xi) * T^-1 = exp(Ad(T) * xi).
Matrix6d adjoint(const Pose &p);

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d &phi);
Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d &phi);

Matrix6d left_jacobian(const Twist &xi);
Matrix6d left_jacobian_inverse(const Twist &xi);
/// J_r(xi) = J_l(-xi).
Matrix6d right_jacobian_inverse(const Twist &xi);

/// Rotation angle of p in radians, in [0, pi].
double rotation_angle(const Pose &p);

}  // namespace se3

}  // namespace scanweave
