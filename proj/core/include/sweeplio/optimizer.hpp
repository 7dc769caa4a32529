#pragma once

#include <array>
#include <span>
#include <vector>

#include "sweeplio/geometry.hpp"
#include "sweeplio/imu.hpp"
#include "sweeplio/sweep.hpp"
#include "sweeplio/voxel_map.hpp"

namespace sweeplio {

struct SolverConfig {
  int registrations = 5;  // association passes per window
  int iterations = 5;     // damped Gauss-Newton steps per association
  double huber_delta = 0.3;
  double p_l = 0.001;  // point-to-plane residual variance
  double tol = 1e-4;   // update-norm early termination
  int min_points = 50;
  bool multi_segment = true;  // include the first segment's IMU block
  bool use_imu = true;
  bool use_consistency = true;
  // information weights of the consistency residual; the begin state and
  // the anchor are the same physical state, so the tie is a soft equality.
  // Pose rows stay moderate so the map remains the absolute reference;
  // velocity/bias rows are stiff (points cannot observe them directly).
  double consistency_weight_pose = 1e4;
  double consistency_weight_vb = 1e8;
  int knn = 20;
  int plane_min_points = 5;
  double min_planarity = 0.1;
  // every neighbor must lie within this distance of the fitted plane,
  // otherwise the fit is rejected (keeps corner-straddling neighborhoods out)
  double plane_fit_max_dist = 0.1;
  // rms of the neighbor-to-plane distances must stay below this
  double plane_rms_max = 0.01;
  double max_assoc_dist = 0.5;  // skip points farther than this from the fit
  bool constant_point_weight = false;  // 1.0 instead of the planarity score
};

// Per-state local parameterization, fixed project-wide:
//   (d_t 0..2, d_theta 3..5, d_v 6..8, d_ba 9..11, d_bw 12..14)
// with rotation retracted as q <- q * exp_q(d_theta).

struct PointToPlaneResidual {
  double r = 0.0;
  Eigen::RowVector3d d_t_s;      // w.r.t. the segment-begin translation
  Eigen::RowVector3d d_t_e;      // w.r.t. the segment-end translation
  Eigen::RowVector3d d_theta_s;  // w.r.t. the segment-begin rotation
  Eigen::RowVector3d d_theta_e;  // w.r.t. the segment-end rotation
};

// Signed distance of the pose-interpolated point to the plane, scaled by the
// point weight. p_body is already in the IMU frame. The rotation Jacobians
// are the exact derivatives through the geodesic interpolation; they reduce
// to the (1-alpha)/alpha lever-arm form as the relative rotation goes to 0.
PointToPlaneResidual point_to_plane_residual(const Vec3& p_body, double t_p,
                                             const State& x_s,
                                             const State& x_e,
                                             const PlaneFit& plane,
                                             double weight);

// Residual rows: (translation 0..2, velocity 3..5, rotation 6..8,
// d_ba 9..11, d_bw 12..14), matching the pre-integration covariance order.
struct ImuResidual {
  Vec15 r;
  Mat15 j_from;
  Mat15 j_to;
};

// Pre-integrated IMU residual between two states. The pre-integration is
// bias-corrected to the from-state biases on the fly each evaluation.
// Throws DataError when the pre-integration span does not match the state
// timestamps within 1e-6 s.
ImuResidual imu_residual(const State& x_from, const State& x_to,
                         const Preintegration& preint, const Vec3& gravity);

struct ConsistencyResidual {
  Vec15 r;
  Mat15 j;  // w.r.t. the begin state; the anchor is fixed
};

// Ties the window's begin state to the previous window's solution at the
// same timestamp.
ConsistencyResidual consistency_residual(const State& x_b,
                                         const State& anchor);

// The four optimizable states bounding the three segments of one
// reconstructed sweep, plus the fixed anchor they hang off.
struct OptWindow {
  State x_b;   // at t_b = anchor timestamp
  State x_e1;  // first internal boundary
  State x_e2;  // second internal boundary
  State x_e3;  // sweep end
  State anchor;
  std::array<Preintegration, 3> preints;  // one per segment
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);

  State& state(int k);
  const State& state(int k) const;
};

using Mat60 = Eigen::Matrix<double, 60, 60>;
using Vec60 = Eigen::Matrix<double, 60, 1>;

// Normal equations of the full window objective at the current estimate.
// Exposed for diagnostics and observability checks.
struct WindowSystem {
  Mat60 H = Mat60::Zero();
  Vec60 g = Vec60::Zero();
  double cost = 0.0;
  int point_residuals = 0;
};

WindowSystem build_window_system(const OptWindow& window, const VoxelMap& map,
                                 const ReconstructedSweep& sweep,
                                 const Extrinsics& extrinsics,
                                 const SolverConfig& cfg, bool with_points,
                                 bool with_imu, bool with_consistency);

struct SolveReport {
  int iterations = 0;  // accepted Gauss-Newton steps
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double last_update_norm = 0.0;
  int point_residuals = 0;
  bool converged = false;
};

// Robustified damped Gauss-Newton over the 60 free parameters: an outer
// re-association loop and an inner iteration loop with Levenberg-style
// diagonal damping (accepted steps never increase the objective).
// Throws DegenerateError when fewer than cfg.min_points point residuals
// survive association, SolverError when damping escalation cannot produce a
// solvable system.
SolveReport solve_window(OptWindow& window, const VoxelMap& map,
                         const ReconstructedSweep& sweep,
                         const Extrinsics& extrinsics,
                         const SolverConfig& cfg);

// Rolls the window forward one segment: the solved first internal state
// becomes the new anchor (and the new begin state), the remaining states
// shift down, and the predicted end state enters last.
OptWindow shift_window(const OptWindow& solved,
                       const Preintegration& next_preint,
                       const State& predicted_end);

}  // namespace sweeplio
