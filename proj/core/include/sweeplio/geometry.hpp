#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sweeplio/errors.hpp"

// Quaternion convention, fixed project-wide: Hamilton product, right-handed,
// passive (body-to-world) rotations. Printed/packed 4-vectors are w-first
// [w, x, y, z]. Stored quaternions are kept canonical: unit norm, w >= 0.
// Local perturbations are right-multiplicative: q <- q * exp_q(delta_theta).

namespace sweeplio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;
using Vec4 = Eigen::Vector4d;

inline constexpr double kUnitNormTol = 1e-9;

// Unit norm and w >= 0.
Quat canonical(const Quat& q);

Mat3 skew(const Vec3& v);

// Rotation-vector exponential/logarithm on the quaternion group.
// quat_log returns the shortest rotation vector (|phi| <= pi).
Quat quat_exp(const Vec3& phi);
Vec3 quat_log(const Quat& q);

Mat3 so3_exp(const Vec3& phi);
// Right Jacobian of SO(3): Exp(phi + d) ~= Exp(phi) Exp(Jr(phi) d).
Mat3 so3_right_jacobian(const Vec3& phi);
Mat3 so3_right_jacobian_inv(const Vec3& phi);
// Left Jacobian: Exp(d + ...) from the left; Jl(phi) = Jr(-phi).
Mat3 so3_left_jacobian_inv(const Vec3& phi);

// Hamilton-product matrices on w-first 4-vectors:
// quat_left(a) * wxyz(b) == wxyz(a*b), quat_right(b) * wxyz(a) == wxyz(a*b).
Mat4 quat_left(const Quat& q);
Mat4 quat_right(const Quat& q);
Vec4 quat_wxyz(const Quat& q);
Quat quat_from_wxyz(const Vec4& v);

// Geodesic interpolation with the shortest-path branch; falls back to
// normalized linear interpolation when the endpoints are nearly identical.
Quat slerp(const Quat& q0, const Quat& q1, double alpha);

struct Pose {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Quat& q, const Vec3& t) : rotation(canonical(q)), translation(t) {}

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& o) const {
    return Pose(rotation * o.rotation, rotation * o.translation + translation);
  }
  Pose inverse() const {
    Quat qi = rotation.conjugate();
    return Pose(qi, -(qi * translation));
  }
};

// Full navigation state at one timestamp.
struct State {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  double timestamp = 0.0;

  Pose pose() const { return Pose(rotation, translation); }
};

// Linear interpolation of all vector fields, slerp for rotation.
// Throws DegenerateError when the interval is empty or reversed.
State interpolate_state(const State& xb, const State& xe, double t);

// Constant sensor mounting; p_imu = lidar_to_imu * p_lidar.
struct Extrinsics {
  Pose lidar_to_imu;
};

}  // namespace sweeplio
