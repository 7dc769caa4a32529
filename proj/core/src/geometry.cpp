#include "sweeplio/geometry.hpp"

#include <cmath>

namespace sweeplio {

Quat canonical(const Quat& q) {
  Quat out = q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Quat quat_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const double half = 0.5 * theta;
  double scale;
  if (theta < 1e-10) {
    scale = 0.5 - half * half / 12.0;  // sin(t/2)/t series
  } else {
    scale = std::sin(half) / theta;
  }
  Quat q(std::cos(half), scale * phi.x(), scale * phi.y(), scale * phi.z());
  return q.normalized();
}

Vec3 quat_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double vn = q.vec().norm();
  if (vn < 1e-12) return 2.0 * q.vec();  // angle ~ 0
  const double theta = 2.0 * std::atan2(vn, q.w());
  return (theta / vn) * q.vec();
}

Mat3 so3_exp(const Vec3& phi) { return quat_exp(phi).toRotationMatrix(); }

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 px = skew(phi);
  if (theta < 1e-7) {
    return Mat3::Identity() - 0.5 * px + (1.0 / 6.0) * px * px;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() - a * px + b * px * px;
}

Mat3 so3_right_jacobian_inv(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 px = skew(phi);
  if (theta < 1e-7) {
    return Mat3::Identity() + 0.5 * px + (1.0 / 12.0) * px * px;
  }
  const double c =
      1.0 / (theta * theta) -
      (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * px + c * px * px;
}

Mat3 so3_left_jacobian_inv(const Vec3& phi) {
  return so3_right_jacobian_inv(-phi);
}

Mat4 quat_left(const Quat& q) {
  Mat4 m;
  m(0, 0) = q.w();
  m.block<1, 3>(0, 1) = -q.vec().transpose();
  m.block<3, 1>(1, 0) = q.vec();
  m.block<3, 3>(1, 1) = q.w() * Mat3::Identity() + skew(q.vec());
  return m;
}

Mat4 quat_right(const Quat& q) {
  Mat4 m;
  m(0, 0) = q.w();
  m.block<1, 3>(0, 1) = -q.vec().transpose();
  m.block<3, 1>(1, 0) = q.vec();
  m.block<3, 3>(1, 1) = q.w() * Mat3::Identity() - skew(q.vec());
  return m;
}

Vec4 quat_wxyz(const Quat& q) { return Vec4(q.w(), q.x(), q.y(), q.z()); }

Quat quat_from_wxyz(const Vec4& v) { return Quat(v(0), v(1), v(2), v(3)); }

Quat slerp(const Quat& q0, const Quat& q1, double alpha) {
  double dot = q0.dot(q1);
  Quat qe = q1;
  if (dot < 0.0) {
    qe.coeffs() = -qe.coeffs();
    dot = -dot;
  }
  Quat out;
  if (dot > 1.0 - 1e-8) {
    out.coeffs() = (1.0 - alpha) * q0.coeffs() + alpha * qe.coeffs();
  } else {
    const double omega = std::acos(std::min(dot, 1.0));
    const double s = std::sin(omega);
    out.coeffs() = (std::sin((1.0 - alpha) * omega) / s) * q0.coeffs() +
                   (std::sin(alpha * omega) / s) * qe.coeffs();
  }
  out.normalize();
  return out;
}

State interpolate_state(const State& xb, const State& xe, double t) {
  const double span = xe.timestamp - xb.timestamp;
  if (!(span > 0.0)) {
    throw DegenerateError("interpolate_state: empty or reversed time interval");
  }
  const double a = (t - xb.timestamp) / span;
  State out;
  out.translation = (1.0 - a) * xb.translation + a * xe.translation;
  out.rotation = canonical(slerp(xb.rotation, xe.rotation, a));
  out.velocity = (1.0 - a) * xb.velocity + a * xe.velocity;
  out.accel_bias = (1.0 - a) * xb.accel_bias + a * xe.accel_bias;
  out.gyro_bias = (1.0 - a) * xb.gyro_bias + a * xe.gyro_bias;
  out.timestamp = t;
  return out;
}

}  // namespace sweeplio
