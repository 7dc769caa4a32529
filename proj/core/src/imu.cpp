#include "sweeplio/imu.hpp"

#include <algorithm>
#include <cmath>

namespace sweeplio {

namespace {

ImuSample lerp_sample(const ImuSample& a, const ImuSample& b, double t) {
  const double u = (t - a.timestamp) / (b.timestamp - a.timestamp);
  ImuSample s;
  s.timestamp = t;
  s.accel = (1.0 - u) * a.accel + u * b.accel;
  s.gyro = (1.0 - u) * a.gyro + u * b.gyro;
  return s;
}

}  // namespace

ErrorStateBlocks propagate_error_state(const ImuSample& s0,
                                       const ImuSample& s1, const Vec3& ba,
                                       const Vec3& bw, const Mat3& R_gamma,
                                       double dt) {
  const Vec3 a_mid = 0.5 * (s0.accel + s1.accel) - ba;
  const Vec3 w_mid = 0.5 * (s0.gyro + s1.gyro) - bw;
  const Mat3 I = Mat3::Identity();

  ErrorStateBlocks blocks;
  Mat15& F = blocks.F;
  F.block<3, 3>(0, 3) = I * dt;
  F.block<3, 3>(3, 6) = -R_gamma * skew(a_mid) * dt;
  F.block<3, 3>(3, 9) = -R_gamma * dt;
  F.block<3, 3>(6, 6) = I - skew(w_mid) * dt;
  F.block<3, 3>(6, 12) = -I * dt;

  Mat15x12& G = blocks.G;
  G.block<3, 3>(3, 0) = -R_gamma * dt;
  G.block<3, 3>(6, 3) = -I * dt;
  G.block<3, 3>(9, 6) = I * dt;
  G.block<3, 3>(12, 9) = I * dt;
  return blocks;
}

void Preintegration::step(const ImuSample& s0, const ImuSample& s1,
                          const NoiseParams& noise) {
  const double dt = s1.timestamp - s0.timestamp;
  if (dt <= 0.0) return;

  const Mat3 R_n = gamma_.toRotationMatrix();
  const Vec3 w_mid = 0.5 * (s0.gyro + s1.gyro) - lin_bw_;
  const Quat gamma_next = (gamma_ * quat_exp(w_mid * dt)).normalized();
  const Mat3 R_n1 = gamma_next.toRotationMatrix();

  const Vec3 a0 = s0.accel - lin_ba_;
  const Vec3 a1 = s1.accel - lin_ba_;
  const Vec3 acc_mid = 0.5 * (R_n * a0 + R_n1 * a1);

  // covariance: first-order discrete error-state transition
  const ErrorStateBlocks blocks =
      propagate_error_state(s0, s1, lin_ba_, lin_bw_, R_n, dt);
  Eigen::Matrix<double, 12, 12> Q = Eigen::Matrix<double, 12, 12>::Zero();
  Q.block<3, 3>(0, 0) = noise.sigma_a * noise.sigma_a * Mat3::Identity();
  Q.block<3, 3>(3, 3) = noise.sigma_w * noise.sigma_w * Mat3::Identity();
  Q.block<3, 3>(6, 6) = noise.sigma_ba * noise.sigma_ba * Mat3::Identity();
  Q.block<3, 3>(9, 9) = noise.sigma_bw * noise.sigma_bw * Mat3::Identity();
  covariance_ = blocks.F * covariance_ * blocks.F.transpose() +
                blocks.G * Q * blocks.G.transpose();
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();

  // bias Jacobian: exact derivative of the discrete midpoint step, so the
  // first-order bias translation is limited only by the bias nonlinearity
  const Mat3 Exp_neg = so3_exp(-w_mid * dt);
  const Mat3 Jr = so3_right_jacobian(w_mid * dt);
  const Mat3 dacc_dtheta =
      -0.5 * (R_n * skew(a0) + R_n1 * skew(a1) * Exp_neg);
  const Mat3 dacc_dba = -0.5 * (R_n + R_n1);
  const Mat3 dacc_dbw = 0.5 * R_n1 * skew(a1) * Jr * dt;

  Mat15 A = Mat15::Identity();
  A.block<3, 3>(0, 3) = Mat3::Identity() * dt;
  A.block<3, 3>(0, 6) = 0.5 * dt * dt * dacc_dtheta;
  A.block<3, 3>(0, 9) = 0.5 * dt * dt * dacc_dba;
  A.block<3, 3>(0, 12) = 0.5 * dt * dt * dacc_dbw;
  A.block<3, 3>(3, 6) = dt * dacc_dtheta;
  A.block<3, 3>(3, 9) = dt * dacc_dba;
  A.block<3, 3>(3, 12) = dt * dacc_dbw;
  A.block<3, 3>(6, 6) = Exp_neg;
  A.block<3, 3>(6, 12) = -Jr * dt;
  jacobian_ = A * jacobian_;

  alpha_ += beta_ * dt + 0.5 * acc_mid * dt * dt;
  beta_ += acc_mid * dt;
  gamma_ = gamma_next;
  dt_total_ += dt;
}

Preintegration Preintegration::integrate(std::span<const ImuSample> stream,
                                         double t_start, double t_end,
                                         const Vec3& ba, const Vec3& bw,
                                         const NoiseParams& noise) {
  if (!(t_end > t_start)) {
    throw DataError("preintegrate: empty sample window");
  }
  const std::vector<ImuSample> samples = slice_window(stream, t_start, t_end);
  Preintegration p;
  p.lin_ba_ = ba;
  p.lin_bw_ = bw;
  p.t_start_ = t_start;
  p.t_end_ = t_end;
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    p.step(samples[i], samples[i + 1], noise);
  }
  return p;
}

BiasCorrected Preintegration::correct(const Vec3& new_ba,
                                      const Vec3& new_bw) const {
  const Vec3 dba = new_ba - lin_ba_;
  const Vec3 dbw = new_bw - lin_bw_;
  BiasCorrected out;
  out.alpha = alpha_ + j_alpha_ba() * dba + j_alpha_bw() * dbw;
  out.beta = beta_ + j_beta_ba() * dba + j_beta_bw() * dbw;
  const Vec3 half = 0.5 * (j_gamma_bw() * dbw);
  out.gamma =
      (gamma_ * Quat(1.0, half.x(), half.y(), half.z())).normalized();
  return out;
}

std::vector<ImuSample> slice_window(std::span<const ImuSample> stream,
                                    double t0, double t1) {
  if (stream.size() < 2 || stream.front().timestamp > t0 + 1e-9 ||
      stream.back().timestamp < t1 - 1e-9) {
    throw DataError("slice_window: IMU stream does not cover the window");
  }
  for (size_t i = 0; i + 1 < stream.size(); ++i) {
    if (stream[i + 1].timestamp <= stream[i].timestamp) {
      throw DataError("slice_window: non-monotone IMU timestamps");
    }
  }
  auto lower = std::lower_bound(
      stream.begin(), stream.end(), t0,
      [](const ImuSample& s, double t) { return s.timestamp < t; });
  // index of the last sample with timestamp <= t0
  size_t i0 = static_cast<size_t>(lower - stream.begin());
  if (i0 == stream.size() || stream[i0].timestamp > t0) {
    i0 = (i0 == 0) ? 0 : i0 - 1;
  }

  std::vector<ImuSample> out;
  if (stream[i0].timestamp >= t0 - 1e-12) {
    ImuSample first = stream[i0];
    first.timestamp = std::max(first.timestamp, t0);
    out.push_back(first);
  } else {
    out.push_back(lerp_sample(stream[i0], stream[i0 + 1], t0));
  }
  size_t i = i0 + 1;
  while (i < stream.size() && stream[i].timestamp < t1 - 1e-12) {
    if (stream[i].timestamp > t0 + 1e-12) out.push_back(stream[i]);
    ++i;
  }
  if (i < stream.size() && std::abs(stream[i].timestamp - t1) <= 1e-12) {
    out.push_back(stream[i]);
  } else {
    out.push_back(lerp_sample(stream[i - 1], stream[i], t1));
  }
  return out;
}

std::vector<ImuSample> upsample_linear(std::span<const ImuSample> stream,
                                       double target_rate) {
  std::vector<ImuSample> out;
  if (stream.size() < 2 || target_rate <= 0.0) {
    out.assign(stream.begin(), stream.end());
    return out;
  }
  const double dt = 1.0 / target_rate;
  const double t0 = stream.front().timestamp;
  const double t1 = stream.back().timestamp;
  size_t hi = 1;
  for (long k = 0;; ++k) {
    const double t = t0 + k * dt;
    if (t > t1 + 1e-12) break;
    while (hi + 1 < stream.size() && stream[hi].timestamp < t) ++hi;
    out.push_back(lerp_sample(stream[hi - 1], stream[hi], std::min(t, t1)));
  }
  return out;
}

State propagate_state(const State& state, std::span<const ImuSample> stream,
                      double t1, const Vec3& gravity) {
  const std::vector<ImuSample> samples =
      slice_window(stream, state.timestamp, t1);
  State x = state;
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    const ImuSample& s0 = samples[i];
    const ImuSample& s1 = samples[i + 1];
    const double dt = s1.timestamp - s0.timestamp;
    if (dt <= 0.0) continue;
    const Vec3 w_mid = 0.5 * (s0.gyro + s1.gyro) - x.gyro_bias;
    const Quat q_next = canonical(x.rotation * quat_exp(w_mid * dt));
    const Vec3 acc0 = x.rotation * (s0.accel - x.accel_bias) - gravity;
    const Vec3 acc1 = q_next * (s1.accel - x.accel_bias) - gravity;
    const Vec3 acc = 0.5 * (acc0 + acc1);
    x.translation += x.velocity * dt + 0.5 * acc * dt * dt;
    x.velocity += acc * dt;
    x.rotation = q_next;
  }
  x.timestamp = t1;
  return x;
}

std::pair<State, State> predict_states(const State& anchor,
                                       const State& prev_begin,
                                       std::span<const ImuSample> stream,
                                       double t_target, const Vec3& gravity) {
  State x_b = prev_begin;
  State x_e = propagate_state(anchor, stream, t_target, gravity);
  x_e.accel_bias = anchor.accel_bias;
  x_e.gyro_bias = anchor.gyro_bias;
  return {x_b, x_e};
}

}  // namespace sweeplio
