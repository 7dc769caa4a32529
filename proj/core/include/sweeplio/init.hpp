#pragma once

#include <span>
#include <vector>

#include "sweeplio/imu.hpp"
#include "sweeplio/optimizer.hpp"
#include "sweeplio/voxel_map.hpp"

namespace sweeplio {

struct InitResult {
  Vec3 gravity_w = Vec3::Zero();  // rest specific force, |g| = G
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  std::vector<Vec3> velocities;      // world frame, motion init only
  std::vector<State> initial_states;
};

struct StaticInitOptions {
  double window = 1.0;               // seconds of data to average
  double accel_var_limit = 0.05 * 0.05;  // per-axis variance thresholds
  double gyro_var_limit = 0.01 * 0.01;
};

// Stationary-window bootstrap: gyro bias and (gravity, accel bias) from the
// sample means. Throws InitError when the variance check detects motion.
InitResult static_init(std::span<const ImuSample> samples, double gravity_norm,
                       const StaticInitOptions& options = {});

// LiDAR-only tracking of the first reconstructed sweeps: the map is seeded
// from the first sweep, later sweeps are registered with the window solver
// with IMU terms disabled and the map grows through the frequency gate.
// Returns one pose per sweep (at the sweep end time).
struct BootstrapOptions {
  SolverConfig solver;      // use_imu is forced off
  double map_min_gap = 0.1;
  double max_mean_residual = 0.5;  // divergence guard (meters)
};

std::vector<Pose> lidar_only_bootstrap(
    std::span<const ReconstructedSweep> sweeps, VoxelMap& map,
    const Extrinsics& extrinsics, const Vec3& gravity,
    const BootstrapOptions& options);

// Closed-form normal-equation solve of the gyro bias from stacked rotation
// errors between consecutive bootstrap poses and their pre-integrations.
// Throws InitError when the normal matrix is singular (no usable rotation
// constraints; use static_init instead).
Vec3 estimate_gyro_bias(std::span<const Quat> rotations,
                        std::span<const Preintegration> preints);

// Stacked linear solve for the per-sweep velocities and gravity, then a
// two-DOF tangent refinement constraining |g| = G. Poses are world-frame;
// outputs are world-frame. Throws InitError on a rank-deficient system.
InitResult init_velocity_gravity(std::span<const Pose> poses,
                                 std::span<const Preintegration> preints,
                                 const Vec3& gyro_bias, double gravity_norm);

}  // namespace sweeplio
