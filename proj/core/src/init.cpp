#include "sweeplio/init.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace sweeplio {

InitResult static_init(std::span<const ImuSample> samples, double gravity_norm,
                       const StaticInitOptions& options) {
  if (samples.empty()) throw InitError("static_init: no IMU samples");
  const double t0 = samples.front().timestamp;
  Vec3 mean_a = Vec3::Zero(), mean_w = Vec3::Zero();
  size_t count = 0;
  for (const ImuSample& s : samples) {
    if (s.timestamp > t0 + options.window) break;
    mean_a += s.accel;
    mean_w += s.gyro;
    ++count;
  }
  if (count < 10) throw InitError("static_init: too few samples in window");
  mean_a /= static_cast<double>(count);
  mean_w /= static_cast<double>(count);

  Vec3 var_a = Vec3::Zero(), var_w = Vec3::Zero();
  for (size_t i = 0; i < count; ++i) {
    var_a += (samples[i].accel - mean_a).cwiseAbs2();
    var_w += (samples[i].gyro - mean_w).cwiseAbs2();
  }
  var_a /= static_cast<double>(count);
  var_w /= static_cast<double>(count);
  if (var_a.maxCoeff() > options.accel_var_limit ||
      var_w.maxCoeff() > options.gyro_var_limit) {
    throw InitError("static_init: motion detected during the static window");
  }

  InitResult out;
  out.gyro_bias = mean_w;
  out.gravity_w = mean_a.normalized() * gravity_norm;
  out.accel_bias = mean_a - out.gravity_w;

  State x0;
  x0.timestamp = samples[count - 1].timestamp;
  x0.accel_bias = out.accel_bias;
  x0.gyro_bias = out.gyro_bias;
  out.initial_states.push_back(x0);
  return out;
}

namespace {

double mean_abs_plane_distance(const OptWindow& window, const VoxelMap& map,
                               const ReconstructedSweep& sweep,
                               const Extrinsics& extrinsics,
                               const SolverConfig& cfg) {
  double sum = 0.0;
  size_t n = 0;
  for (int k = 0; k < 3; ++k) {
    for (const TimedPoint& p : sweep.segments[k].points) {
      const Vec3 p_body = extrinsics.lidar_to_imu * p.position;
      const State x_p =
          interpolate_state(window.state(k), window.state(k + 1), p.timestamp);
      const Vec3 p_w = x_p.pose() * p_body;
      const auto fit = fit_plane(map.nearest_neighbors(p_w, cfg.knn),
                                 cfg.plane_min_points, cfg.min_planarity);
      if (!fit) continue;
      sum += std::abs(fit->normal.dot(p_w) + fit->d);
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::infinity()
                : sum / static_cast<double>(n);
}

std::vector<Vec3> sweep_points_world(const OptWindow& window,
                                     const ReconstructedSweep& sweep,
                                     const Extrinsics& extrinsics) {
  std::vector<Vec3> out;
  out.reserve(sweep.point_count());
  for (int k = 0; k < 3; ++k) {
    for (const TimedPoint& p : sweep.segments[k].points) {
      const State x_p =
          interpolate_state(window.state(k), window.state(k + 1), p.timestamp);
      out.push_back(x_p.pose() * (extrinsics.lidar_to_imu * p.position));
    }
  }
  return out;
}

}  // namespace

std::vector<Pose> lidar_only_bootstrap(
    std::span<const ReconstructedSweep> sweeps, VoxelMap& map,
    const Extrinsics& extrinsics, const Vec3& gravity,
    const BootstrapOptions& options) {
  if (sweeps.empty()) throw InitError("bootstrap: no sweeps");
  SolverConfig cfg = options.solver;
  cfg.use_imu = false;

  std::vector<Pose> poses;
  poses.reserve(sweeps.size());

  // state chain at the four segment boundaries of the current sweep
  std::array<State, 4> chain;
  {
    const auto b = sweeps.front().boundaries();
    for (int k = 0; k < 4; ++k) chain[k].timestamp = b[k];
  }

  // the first sweep seeds the map at the initial pose
  {
    OptWindow seed_window;
    for (int k = 0; k < 4; ++k) seed_window.state(k) = chain[k];
    seed_window.anchor = chain[0];
    seed_window.gravity = gravity;
    const std::vector<Vec3> pts =
        sweep_points_world(seed_window, sweeps.front(), extrinsics);
    map.insert_sweep(pts, sweeps.front().t_end, options.map_min_gap);
    poses.push_back(chain[3].pose());
  }

  for (size_t i = 1; i < sweeps.size(); ++i) {
    const ReconstructedSweep& sweep = sweeps[i];
    const auto b = sweep.boundaries();
    OptWindow window;
    window.gravity = gravity;
    window.anchor = chain[1];
    window.x_b = chain[1];
    window.x_e1 = chain[2];
    window.x_e2 = chain[3];
    window.x_e3 = chain[3];  // constant-pose prediction
    window.x_e3.timestamp = b[3];

    solve_window(window, map, sweep, extrinsics, cfg);

    const double mean_residual =
        mean_abs_plane_distance(window, map, sweep, extrinsics, cfg);
    if (mean_residual > options.max_mean_residual) {
      throw InitError("bootstrap: ICP diverged at sweep " +
                      std::to_string(i) + " (mean residual " +
                      std::to_string(mean_residual) + " m)");
    }

    const std::vector<Vec3> pts = sweep_points_world(window, sweep, extrinsics);
    map.insert_sweep(pts, sweep.t_end, options.map_min_gap);

    chain = {window.x_b, window.x_e1, window.x_e2, window.x_e3};
    poses.push_back(window.x_e3.pose());
  }
  return poses;
}

Vec3 estimate_gyro_bias(std::span<const Quat> rotations,
                        std::span<const Preintegration> preints) {
  if (rotations.size() < 2 || preints.size() + 1 != rotations.size()) {
    throw InitError("estimate_gyro_bias: need n rotations and n-1 "
                    "pre-integrations");
  }
  Mat3 normal = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (size_t i = 0; i + 1 < rotations.size(); ++i) {
    const Quat q_rel = rotations[i].conjugate() * rotations[i + 1];
    const Mat3 j = preints[i].j_gamma_bw();
    const Vec3 err =
        2.0 * (preints[i].gamma().conjugate() * q_rel).vec();
    normal += j.transpose() * j;
    rhs += j.transpose() * err;
  }
  const Eigen::JacobiSVD<Mat3> svd(normal, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  if (svd.singularValues()(2) < 1e-12 * svd.singularValues()(0) ||
      svd.singularValues()(0) <= 0.0) {
    throw InitError("estimate_gyro_bias: no rotational constraints; use "
                    "static initialization instead");
  }
  return svd.solve(rhs);
}

InitResult init_velocity_gravity(std::span<const Pose> poses,
                                 std::span<const Preintegration> preints,
                                 const Vec3& gyro_bias, double gravity_norm) {
  const size_t n = poses.size();
  if (n < 3 || preints.size() + 1 != n) {
    throw InitError("init_velocity_gravity: need n poses and n-1 "
                    "pre-integrations");
  }
  // express everything relative to the first pose frame
  const Quat q0 = poses[0].rotation;
  std::vector<Quat> q_rel(n);
  std::vector<Vec3> t_rel(n);
  for (size_t i = 0; i < n; ++i) {
    q_rel[i] = (q0.conjugate() * poses[i].rotation).normalized();
    t_rel[i] = q0.conjugate() * (poses[i].translation - poses[0].translation);
  }

  const int rows = static_cast<int>(6 * (n - 1));
  const int cols = static_cast<int>(3 * n + 3);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(rows);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double dt = preints[i].t_end() - preints[i].t_start();
    const Mat3 R_e0_to_ei = q_rel[i].conjugate().toRotationMatrix();
    const Mat3 R_i1_in_ei =
        (q_rel[i].conjugate() * q_rel[i + 1]).toRotationMatrix();
    const int r = static_cast<int>(6 * i);
    const int ci = static_cast<int>(3 * i);
    const int cg = cols - 3;

    H.block<3, 3>(r, ci) = -Mat3::Identity() * dt;
    H.block<3, 3>(r, cg) = 0.5 * R_e0_to_ei * dt * dt;
    z.segment<3>(r) =
        preints[i].alpha() - R_e0_to_ei * (t_rel[i + 1] - t_rel[i]);

    H.block<3, 3>(r + 3, ci) = -Mat3::Identity();
    H.block<3, 3>(r + 3, ci + 3) = R_i1_in_ei;
    H.block<3, 3>(r + 3, cg) = R_e0_to_ei * dt;
    z.segment<3>(r + 3) = preints[i].beta();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(H);
  qr.setThreshold(1e-9);
  if (qr.rank() < cols) {
    throw InitError("init_velocity_gravity: rank-deficient system "
                    "(insufficient excitation)");
  }
  Eigen::VectorXd x = qr.solve(z);
  Vec3 g_e0 = x.tail<3>();

  // refine gravity on the 2-DOF tangent of the |g| = G sphere
  for (int pass = 0; pass < 4; ++pass) {
    const Vec3 g_dir = g_e0.normalized() * gravity_norm;
    const Vec3 any = std::abs(g_dir.z()) < 0.9 * gravity_norm
                         ? Vec3::UnitZ()
                         : Vec3::UnitX();
    Eigen::Matrix<double, 3, 2> basis;
    basis.col(0) = g_dir.cross(any).normalized();
    basis.col(1) = g_dir.cross(basis.col(0)).normalized();

    Eigen::MatrixXd H2(rows, cols - 1);
    H2.leftCols(cols - 3) = H.leftCols(cols - 3);
    H2.rightCols(2) = H.rightCols(3) * basis;
    const Eigen::VectorXd z2 = z - H.rightCols(3) * g_dir;
    Eigen::VectorXd x2 =
        H2.colPivHouseholderQr().solve(z2);
    g_e0 = (g_dir + basis * x2.tail<2>()).normalized() * gravity_norm;
    x.head(cols - 3) = x2.head(cols - 3);
  }

  InitResult out;
  out.gravity_w = q0 * g_e0;
  out.gyro_bias = gyro_bias;
  out.accel_bias = Vec3::Zero();
  out.velocities.resize(n);
  out.initial_states.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 v_body = x.segment<3>(3 * i);
    out.velocities[i] = poses[i].rotation * v_body;
    State s;
    s.translation = poses[i].translation;
    s.rotation = poses[i].rotation;
    s.velocity = out.velocities[i];
    s.gyro_bias = gyro_bias;
    s.timestamp =
        i + 1 < n ? preints[i].t_start() : preints[n - 2].t_end();
    out.initial_states[i] = s;
  }
  return out;
}

}  // namespace sweeplio
