#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sweeplio/geometry.hpp"

namespace sweeplio {

struct ImuSample {
  double timestamp = 0.0;
  Vec3 accel = Vec3::Zero();  // specific force, IMU frame (m/s^2)
  Vec3 gyro = Vec3::Zero();   // angular rate, IMU frame (rad/s)
};

struct NoiseParams {
  double sigma_a = 0.02;    // accel measurement noise density
  double sigma_w = 0.002;   // gyro measurement noise density
  double sigma_ba = 1e-4;   // accel bias random walk
  double sigma_bw = 1e-5;   // gyro bias random walk
  double gravity_norm = 9.81;
};

// Error-state ordering, fixed project-wide:
//   (d_alpha 0..2, d_beta 3..5, d_theta 6..8, d_ba 9..11, d_bw 12..14)
// Noise ordering: (n_a 0..2, n_w 3..5, n_ba 6..8, n_bw 9..11).
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;
using Vec15 = Eigen::Matrix<double, 15, 1>;

struct ErrorStateBlocks {
  Mat15 F = Mat15::Identity();
  Mat15x12 G = Mat15x12::Zero();
};

// Discrete error-state transition over one sample interval, first order in
// dt. R_gamma is the accumulated pre-integration rotation at sample n.
ErrorStateBlocks propagate_error_state(const ImuSample& s0,
                                       const ImuSample& s1, const Vec3& ba,
                                       const Vec3& bw, const Mat3& R_gamma,
                                       double dt);

// Result of translating a pre-integration to a new bias linearization point.
struct BiasCorrected {
  Vec3 alpha;
  Vec3 beta;
  Quat gamma;
};

// Gravity-free relative motion terms between two timestamps, with the
// 15x15 covariance and the 15x15 Jacobian of the terms with respect to the
// initial error state (bias columns are the Eq.-style bias Jacobians).
class Preintegration {
 public:
  // Zero-sample identity element.
  Preintegration() = default;

  // Integrates the samples covering [t_start, t_end]. Boundary samples are
  // synthesized by linear interpolation of the straddling measurements.
  // Throws DataError on an empty window, non-monotone timestamps, or when
  // the stream does not cover the window.
  static Preintegration integrate(std::span<const ImuSample> stream,
                                  double t_start, double t_end, const Vec3& ba,
                                  const Vec3& bw, const NoiseParams& noise);

  // First-order translation to new biases; gamma is renormalized.
  BiasCorrected correct(const Vec3& new_ba, const Vec3& new_bw) const;

  const Vec3& alpha() const { return alpha_; }
  const Vec3& beta() const { return beta_; }
  const Quat& gamma() const { return gamma_; }
  const Mat15& covariance() const { return covariance_; }
  const Mat15& jacobian() const { return jacobian_; }
  const Vec3& lin_accel_bias() const { return lin_ba_; }
  const Vec3& lin_gyro_bias() const { return lin_bw_; }
  double dt_total() const { return dt_total_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }

  Mat3 j_alpha_ba() const { return jacobian_.block<3, 3>(0, 9); }
  Mat3 j_alpha_bw() const { return jacobian_.block<3, 3>(0, 12); }
  Mat3 j_beta_ba() const { return jacobian_.block<3, 3>(3, 9); }
  Mat3 j_beta_bw() const { return jacobian_.block<3, 3>(3, 12); }
  Mat3 j_gamma_bw() const { return jacobian_.block<3, 3>(6, 12); }

 private:
  void step(const ImuSample& s0, const ImuSample& s1,
            const NoiseParams& noise);

  Vec3 alpha_ = Vec3::Zero();
  Vec3 beta_ = Vec3::Zero();
  Quat gamma_ = Quat::Identity();
  Mat15 covariance_ = Mat15::Zero();
  Mat15 jacobian_ = Mat15::Identity();
  Vec3 lin_ba_ = Vec3::Zero();
  Vec3 lin_bw_ = Vec3::Zero();
  double dt_total_ = 0.0;
  double t_start_ = 0.0;
  double t_end_ = 0.0;
};

// Returns the samples covering [t0, t1] with linearly interpolated boundary
// samples at both ends. Throws DataError when the stream does not cover the
// window or timestamps are not strictly increasing.
std::vector<ImuSample> slice_window(std::span<const ImuSample> stream,
                                    double t0, double t1);

// Linear upsampling of an IMU stream to a target rate (e.g. 50 Hz -> 100 Hz).
std::vector<ImuSample> upsample_linear(std::span<const ImuSample> stream,
                                       double target_rate);

// Midpoint propagation of a full state through IMU samples in [state.t, t1];
// biases held constant. gravity is the world-frame rest specific force
// (z-up world => (0, 0, G)).
State propagate_state(const State& state, std::span<const ImuSample> stream,
                      double t1, const Vec3& gravity);

// Window prior: the begin state is copied from the state two segments back
// (the two share a timestamp); the end state is propagated from the anchor.
std::pair<State, State> predict_states(const State& anchor,
                                       const State& prev_begin,
                                       std::span<const ImuSample> stream,
                                       double t_target, const Vec3& gravity);

}  // namespace sweeplio
