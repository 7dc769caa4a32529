#include "sweeplio/optimizer.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

namespace sweeplio {

namespace {

constexpr double kDampingInit = 1e-4;
constexpr double kDampingMax = 1e8;
constexpr double kDampingMin = 1e-12;
constexpr double kDiagFloor = 1e-9;

struct Association {
  Vec3 p_body;
  double t_p;
  int segment;  // 0..2
  PlaneFit plane;
  double weight;
};

double huber_rho(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? x * x : 2.0 * delta * a - delta * delta;
}

double huber_weight(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 1.0 : delta / a;
}

std::vector<Association> associate(const OptWindow& window,
                                   const VoxelMap& map,
                                   const ReconstructedSweep& sweep,
                                   const Extrinsics& extrinsics,
                                   const SolverConfig& cfg) {
  std::vector<Association> out;
  out.reserve(sweep.point_count());
  for (int k = 0; k < 3; ++k) {
    const State& xs = window.state(k);
    const State& xe = window.state(k + 1);
    for (const TimedPoint& p : sweep.segments[k].points) {
      const Vec3 p_body = extrinsics.lidar_to_imu * p.position;
      const State x_p = interpolate_state(xs, xe, p.timestamp);
      const Vec3 p_w = x_p.pose() * p_body;
      const std::vector<Vec3> neighbors = map.nearest_neighbors(p_w, cfg.knn);
      const auto fit =
          fit_plane(neighbors, cfg.plane_min_points, cfg.min_planarity);
      if (!fit) continue;
      bool flat = true;
      double sq_sum = 0.0;
      for (const Vec3& q : neighbors) {
        const double dist = fit->normal.dot(q) + fit->d;
        if (std::abs(dist) > cfg.plane_fit_max_dist) {
          flat = false;
          break;
        }
        sq_sum += dist * dist;
      }
      if (!flat ||
          sq_sum > cfg.plane_rms_max * cfg.plane_rms_max * neighbors.size()) {
        continue;
      }
      if (std::abs(fit->normal.dot(p_w) + fit->d) > cfg.max_assoc_dist) {
        continue;
      }
      const double w = cfg.constant_point_weight
                           ? 1.0
                           : std::clamp(fit->planarity, 0.0, 1.0);
      out.push_back({p_body, p.timestamp, k, *fit, w});
    }
  }
  return out;
}

// one scalar residual touching two states: accumulate into H, g
void add_point_block(const PointToPlaneResidual& res, int si, int ei,
                     double info, double huber_delta, WindowSystem& sys,
                     bool with_gradient) {
  const double rw = res.r * std::sqrt(info);
  const double hw = huber_weight(rw, huber_delta);
  sys.cost += huber_rho(rw, huber_delta);
  if (!with_gradient) return;
  const double scale = hw * info;

  const std::array<std::pair<int, const Eigen::RowVector3d*>, 4> rows = {{
      {15 * si + 0, &res.d_t_s},
      {15 * si + 3, &res.d_theta_s},
      {15 * ei + 0, &res.d_t_e},
      {15 * ei + 3, &res.d_theta_e},
  }};
  for (const auto& [ci, ji] : rows) {
    sys.g.segment<3>(ci) += scale * res.r * ji->transpose();
    for (const auto& [cj, jj] : rows) {
      sys.H.block<3, 3>(ci, cj) += scale * ji->transpose() * (*jj);
    }
  }
}

Mat15 information_of(const Preintegration& p) {
  Mat15 cov = p.covariance();
  cov.diagonal().array() += 1e-16;
  return cov.inverse();
}

void add_imu_block(const ImuResidual& res, const Mat15& info, int si, int ei,
                   WindowSystem& sys, bool with_gradient) {
  sys.cost += res.r.dot(info * res.r);
  if (!with_gradient) return;
  const Mat15 info_jf = info * res.j_from;
  const Mat15 info_jt = info * res.j_to;
  sys.H.block<15, 15>(15 * si, 15 * si) +=
      res.j_from.transpose() * info_jf;
  sys.H.block<15, 15>(15 * si, 15 * ei) += res.j_from.transpose() * info_jt;
  sys.H.block<15, 15>(15 * ei, 15 * si) += res.j_to.transpose() * info_jf;
  sys.H.block<15, 15>(15 * ei, 15 * ei) += res.j_to.transpose() * info_jt;
  sys.g.segment<15>(15 * si) += res.j_from.transpose() * (info * res.r);
  sys.g.segment<15>(15 * ei) += res.j_to.transpose() * (info * res.r);
}

WindowSystem assemble(const OptWindow& window,
                      std::span<const Association> assocs,
                      const std::array<Mat15, 3>& imu_info,
                      const SolverConfig& cfg, bool with_points,
                      bool with_imu, bool with_consistency,
                      bool with_gradient) {
  WindowSystem sys;
  const double point_info = 1.0 / cfg.p_l;

  if (with_points) {
    for (const Association& a : assocs) {
      const State& xs = window.state(a.segment);
      const State& xe = window.state(a.segment + 1);
      const PointToPlaneResidual res = point_to_plane_residual(
          a.p_body, a.t_p, xs, xe, a.plane, a.weight);
      add_point_block(res, a.segment, a.segment + 1, point_info,
                      cfg.huber_delta, sys, with_gradient);
      // the additional residual ties the point to the full-sweep endpoints
      const PointToPlaneResidual res_a = point_to_plane_residual(
          a.p_body, a.t_p, window.x_b, window.x_e3, a.plane, a.weight);
      add_point_block(res_a, 0, 3, point_info, cfg.huber_delta, sys,
                      with_gradient);
      sys.point_residuals += 2;
    }
  }

  if (with_imu) {
    for (int k = 0; k < 3; ++k) {
      if (k == 0 && !cfg.multi_segment) continue;
      const ImuResidual res =
          imu_residual(window.state(k), window.state(k + 1),
                       window.preints[k], window.gravity);
      add_imu_block(res, imu_info[k], k, k + 1, sys, with_gradient);
    }
  }

  if (with_consistency) {
    const ConsistencyResidual res =
        consistency_residual(window.x_b, window.anchor);
    Vec15 w;
    w.segment<6>(0).setConstant(cfg.consistency_weight_pose);
    w.segment<9>(6).setConstant(cfg.consistency_weight_vb);
    sys.cost += res.r.dot(w.asDiagonal() * res.r);
    if (with_gradient) {
      const Mat15 wj = w.asDiagonal() * res.j;
      sys.H.block<15, 15>(0, 0) += res.j.transpose() * wj;
      sys.g.segment<15>(0) += res.j.transpose() * (w.asDiagonal() * res.r);
    }
  }
  return sys;
}

void retract(OptWindow& window, const Vec60& delta) {
  for (int k = 0; k < 4; ++k) {
    State& x = window.state(k);
    const auto d = delta.segment<15>(15 * k);
    x.translation += d.segment<3>(0);
    x.rotation = canonical(x.rotation * quat_exp(d.segment<3>(3)));
    x.velocity += d.segment<3>(6);
    x.accel_bias += d.segment<3>(9);
    x.gyro_bias += d.segment<3>(12);
  }
}

}  // namespace

State& OptWindow::state(int k) {
  switch (k) {
    case 0: return x_b;
    case 1: return x_e1;
    case 2: return x_e2;
    default: return x_e3;
  }
}

const State& OptWindow::state(int k) const {
  return const_cast<OptWindow*>(this)->state(k);
}

PointToPlaneResidual point_to_plane_residual(const Vec3& p_body, double t_p,
                                             const State& x_s,
                                             const State& x_e,
                                             const PlaneFit& plane,
                                             double weight) {
  const double span = x_e.timestamp - x_s.timestamp;
  const double alpha = (t_p - x_s.timestamp) / span;

  const Vec3 phi = quat_log(x_s.rotation.conjugate() * x_e.rotation);
  const Vec3 aphi = alpha * phi;
  const Quat q_p = (x_s.rotation * quat_exp(aphi)).normalized();
  const Vec3 t_p_w =
      (1.0 - alpha) * x_s.translation + alpha * x_e.translation;
  const Vec3 p_w = q_p * p_body + t_p_w;

  PointToPlaneResidual out;
  out.r = weight * (plane.normal.dot(p_w) + plane.d);
  const Eigen::RowVector3d n_t = plane.normal.transpose();
  out.d_t_s = weight * (1.0 - alpha) * n_t;
  out.d_t_e = weight * alpha * n_t;

  const Eigen::RowVector3d lever =
      -weight * n_t * q_p.toRotationMatrix() * skew(p_body);
  const Mat3 jr_a = so3_right_jacobian(aphi);
  const Mat3 psi_s =
      so3_exp(aphi).transpose() - alpha * jr_a * so3_left_jacobian_inv(phi);
  const Mat3 psi_e = alpha * jr_a * so3_right_jacobian_inv(phi);
  out.d_theta_s = lever * psi_s;
  out.d_theta_e = lever * psi_e;
  return out;
}

ImuResidual imu_residual(const State& x_from, const State& x_to,
                         const Preintegration& preint, const Vec3& gravity) {
  if (std::abs(preint.t_start() - x_from.timestamp) > 1e-6 ||
      std::abs(preint.t_end() - x_to.timestamp) > 1e-6) {
    throw DataError("imu_residual: pre-integration span does not match the "
                    "state timestamps");
  }
  const double dt = preint.t_end() - preint.t_start();
  const BiasCorrected c =
      preint.correct(x_from.accel_bias, x_from.gyro_bias);
  const Mat3 Ri_t = x_from.rotation.conjugate().toRotationMatrix();

  ImuResidual out;
  out.r = Vec15::Zero();
  out.j_from = Mat15::Zero();
  out.j_to = Mat15::Zero();
  const Mat3 I = Mat3::Identity();

  // translation rows
  const Vec3 dp = x_to.translation - x_from.translation +
                  0.5 * gravity * dt * dt - x_from.velocity * dt;
  out.r.segment<3>(0) = Ri_t * dp - c.alpha;
  out.j_from.block<3, 3>(0, 0) = -Ri_t;
  out.j_from.block<3, 3>(0, 3) = skew(Ri_t * dp);
  out.j_from.block<3, 3>(0, 6) = -Ri_t * dt;
  out.j_from.block<3, 3>(0, 9) = -preint.j_alpha_ba();
  out.j_from.block<3, 3>(0, 12) = -preint.j_alpha_bw();
  out.j_to.block<3, 3>(0, 0) = Ri_t;

  // velocity rows
  const Vec3 dv = x_to.velocity + gravity * dt - x_from.velocity;
  out.r.segment<3>(3) = Ri_t * dv - c.beta;
  out.j_from.block<3, 3>(3, 3) = skew(Ri_t * dv);
  out.j_from.block<3, 3>(3, 6) = -Ri_t;
  out.j_from.block<3, 3>(3, 9) = -preint.j_beta_ba();
  out.j_from.block<3, 3>(3, 12) = -preint.j_beta_bw();
  out.j_to.block<3, 3>(3, 6) = Ri_t;

  // rotation rows: 2 [ q_from^-1 x q_to x gamma_corrected^-1 ]_xyz
  const Quat a_rel = x_from.rotation.conjugate() * x_to.rotation;
  Quat q_err = a_rel * c.gamma.conjugate();
  const double sign = q_err.w() < 0.0 ? -1.0 : 1.0;
  q_err.coeffs() *= sign;
  out.r.segment<3>(6) = 2.0 * q_err.vec();
  out.j_from.block<3, 3>(6, 3) = -(q_err.w() * I - skew(q_err.vec()));
  out.j_to.block<3, 3>(6, 3) =
      (q_err.w() * I + skew(q_err.vec())) * c.gamma.toRotationMatrix();
  {
    // derivative through the first-order bias correction of gamma,
    // normalization included
    const Mat3 jgw = preint.j_gamma_bw();
    const Vec3 u = 0.5 * (jgw * (x_from.gyro_bias - preint.lin_gyro_bias()));
    const double s2 = 1.0 + u.squaredNorm();
    const double s = std::sqrt(s2);
    const Mat4 b = quat_left(a_rel) * quat_right(preint.gamma().conjugate());
    const Vec3 q_err_vec_raw = sign * q_err.vec();
    out.j_from.block<3, 3>(6, 12) =
        sign * (-(1.0 / s) * b.block<3, 3>(1, 1) * jgw -
                (1.0 / s2) * q_err_vec_raw * (u.transpose() * jgw));
  }

  // bias rows
  out.r.segment<3>(9) = x_to.accel_bias - x_from.accel_bias;
  out.r.segment<3>(12) = x_to.gyro_bias - x_from.gyro_bias;
  out.j_from.block<3, 3>(9, 9) = -I;
  out.j_from.block<3, 3>(12, 12) = -I;
  out.j_to.block<3, 3>(9, 9) = I;
  out.j_to.block<3, 3>(12, 12) = I;
  return out;
}

ConsistencyResidual consistency_residual(const State& x_b,
                                         const State& anchor) {
  ConsistencyResidual out;
  out.r = Vec15::Zero();
  out.j = Mat15::Zero();
  const Mat3 I = Mat3::Identity();

  out.r.segment<3>(0) = x_b.translation - anchor.translation;
  Quat q_err = anchor.rotation.conjugate() * x_b.rotation;
  if (q_err.w() < 0.0) q_err.coeffs() = -q_err.coeffs();
  out.r.segment<3>(3) = 2.0 * q_err.vec();
  out.r.segment<3>(6) = x_b.velocity - anchor.velocity;
  out.r.segment<3>(9) = x_b.accel_bias - anchor.accel_bias;
  out.r.segment<3>(12) = x_b.gyro_bias - anchor.gyro_bias;

  out.j.block<3, 3>(0, 0) = I;
  out.j.block<3, 3>(3, 3) = q_err.w() * I + skew(q_err.vec());
  out.j.block<3, 3>(6, 6) = I;
  out.j.block<3, 3>(9, 9) = I;
  out.j.block<3, 3>(12, 12) = I;
  return out;
}

WindowSystem build_window_system(const OptWindow& window, const VoxelMap& map,
                                 const ReconstructedSweep& sweep,
                                 const Extrinsics& extrinsics,
                                 const SolverConfig& cfg, bool with_points,
                                 bool with_imu, bool with_consistency) {
  std::array<Mat15, 3> imu_info;
  for (int k = 0; k < 3; ++k) imu_info[k] = information_of(window.preints[k]);
  const std::vector<Association> assocs =
      with_points ? associate(window, map, sweep, extrinsics, cfg)
                  : std::vector<Association>{};
  return assemble(window, assocs, imu_info, cfg, with_points, with_imu,
                  with_consistency, true);
}

SolveReport solve_window(OptWindow& window, const VoxelMap& map,
                         const ReconstructedSweep& sweep,
                         const Extrinsics& extrinsics,
                         const SolverConfig& cfg) {
  for (int k = 0; k < 3; ++k) {
    if (!(window.state(k).timestamp < window.state(k + 1).timestamp)) {
      throw DegenerateError("solve_window: window timestamps not increasing");
    }
  }
  std::array<Mat15, 3> imu_info;
  for (int k = 0; k < 3; ++k) imu_info[k] = information_of(window.preints[k]);

  SolveReport report;
  double lambda = kDampingInit;
  bool first_cost_recorded = false;

  for (int reg = 0; reg < cfg.registrations; ++reg) {
    const std::vector<Association> assocs =
        associate(window, map, sweep, extrinsics, cfg);
    if (static_cast<int>(assocs.size()) < cfg.min_points) {
      throw DegenerateError(
          "solve_window: too few valid point residuals (" +
          std::to_string(assocs.size()) + " < " +
          std::to_string(cfg.min_points) + ") at t=" +
          std::to_string(window.x_e3.timestamp));
    }

    for (int iter = 0; iter < cfg.iterations; ++iter) {
      const WindowSystem sys = assemble(window, assocs, imu_info, cfg, true,
                                        cfg.use_imu, cfg.use_consistency,
                                        true);
      if (!first_cost_recorded) {
        report.initial_cost = sys.cost;
        first_cost_recorded = true;
      }
      report.point_residuals = sys.point_residuals;

      bool accepted = false;
      while (!accepted) {
        Mat60 damped = sys.H;
        damped.diagonal() +=
            lambda * sys.H.diagonal().cwiseMax(kDiagFloor);
        const Eigen::LDLT<Mat60> ldlt(damped);
        Vec60 delta = Vec60::Zero();
        bool solvable = ldlt.info() == Eigen::Success;
        if (solvable) {
          delta = -ldlt.solve(sys.g);
          solvable = delta.allFinite();
        }
        if (solvable) {
          OptWindow trial = window;
          retract(trial, delta);
          const WindowSystem trial_sys =
              assemble(trial, assocs, imu_info, cfg, true, cfg.use_imu,
                       cfg.use_consistency, false);
          if (trial_sys.cost <= sys.cost + 1e-12) {
            window = trial;
            report.final_cost = trial_sys.cost;
            report.last_update_norm = delta.norm();
            ++report.iterations;
            lambda = std::max(lambda / 10.0, kDampingMin);
            accepted = true;
            break;
          }
        }
        lambda *= 10.0;
        if (lambda > kDampingMax) {
          if (!solvable) {
            throw SolverError(
                "solve_window: normal equations unsolvable after damping "
                "escalation at t=" +
                std::to_string(window.x_e3.timestamp));
          }
          break;  // no descent step available; keep the current estimate
        }
      }
      if (!accepted) break;
      if (report.last_update_norm < cfg.tol) {
        report.converged = true;
        break;
      }
    }
  }
  if (!first_cost_recorded) {
    const WindowSystem sys = assemble(window, {}, imu_info, cfg, false,
                                      cfg.use_imu, cfg.use_consistency, false);
    report.initial_cost = report.final_cost = sys.cost;
  }
  return report;
}

OptWindow shift_window(const OptWindow& solved,
                       const Preintegration& next_preint,
                       const State& predicted_end) {
  OptWindow next;
  next.anchor = solved.x_e1;
  next.x_b = solved.x_e1;
  next.x_e1 = solved.x_e2;
  next.x_e2 = solved.x_e3;
  next.x_e3 = predicted_end;
  next.preints = {solved.preints[1], solved.preints[2], next_preint};
  next.gravity = solved.gravity;
  return next;
}

}  // namespace sweeplio
