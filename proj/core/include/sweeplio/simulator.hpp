#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sweeplio/geometry.hpp"
#include "sweeplio/imu.hpp"
#include "sweeplio/sweep.hpp"

namespace sweeplio {

// Analytic trajectory with exact derivatives; the constructor cross-checks
// velocity/acceleration/angular-rate against finite differences of the pose
// functions and throws std::logic_error on a mismatch.
class Trajectory {
 public:
  enum class Kind { kStatic, kConstantVelocity, kCircle, kFigureEight };

  static Trajectory make_static(double duration);
  // Stationary for lead_in seconds, smooth (quintic) ramp over ramp seconds,
  // then cruise at speed along direction. Attitude stays identity.
  static Trajectory make_constant_velocity(double speed, const Vec3& direction,
                                           double duration,
                                           double lead_in = 0.0,
                                           double ramp = 0.0);
  // Planar circle at constant speed, yaw following the tangent.
  static Trajectory make_circle(double radius, double speed, double duration,
                                double height = 0.0);
  // Planar Gerono figure-eight, yaw following the velocity direction.
  static Trajectory make_figure_eight(double half_width, double angular_rate,
                                      double duration, double height = 0.0);

  Kind kind() const { return kind_; }
  double duration() const { return duration_; }
  // construction parameters, for manifest round-trips
  const std::vector<std::pair<std::string, double>>& params() const {
    return params_;
  }

  Vec3 position(double t) const { return position_(t); }
  Quat orientation(double t) const { return orientation_(t); }
  Vec3 velocity(double t) const { return velocity_(t); }
  Vec3 acceleration(double t) const { return acceleration_(t); }
  Vec3 angular_rate_body(double t) const { return angular_rate_(t); }

  Pose pose(double t) const { return Pose(orientation(t), position(t)); }

 private:
  Trajectory() = default;
  void validate() const;

  Kind kind_ = Kind::kStatic;
  double duration_ = 0.0;
  std::vector<std::pair<std::string, double>> params_;
  std::function<Vec3(double)> position_;
  std::function<Quat(double)> orientation_;
  std::function<Vec3(double)> velocity_;
  std::function<Vec3(double)> acceleration_;
  std::function<Vec3(double)> angular_rate_;
};

// Finite rectangular plane patch; n.x + d = 0 on the supporting plane.
struct WorldPlane {
  Vec3 normal;
  double d;
  Vec3 center;
  Vec3 axis_u;
  Vec3 axis_v;
  double half_u;
  double half_v;

  static WorldPlane make(const Vec3& center, const Vec3& normal,
                         const Vec3& axis_u, double half_u, double half_v);
};

struct WorldModel {
  std::vector<WorldPlane> planes;

  // Rectangular room centered on the origin footprint, floor at z = 0.
  static WorldModel box_room(double length, double width, double height);
  // Two side walls, floor, ceiling and both end walls; x is the long axis,
  // spanning [x0, x0 + length].
  static WorldModel corridor(double x0, double length, double width,
                             double height);
};

struct LidarSpec {
  int rings = 32;
  int azimuth_steps = 360;
  double rev_rate = 10.0;  // Hz
  double max_range = 60.0;
  double min_range = 0.3;
  double elevation_min_deg = -15.0;
  double elevation_max_deg = 15.0;
};

struct SensorSpec {
  LidarSpec lidar;
  double imu_rate = 100.0;
  NoiseParams noise;
  bool noisy = false;  // when false biases still apply, white noise does not
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  Extrinsics extrinsics;
  uint64_t seed = 1;
};

// Samples the accelerometer/gyro model along the trajectory. gravity is the
// world-frame rest specific force (z-up: (0,0,G)).
std::vector<ImuSample> simulate_imu(const Trajectory& traj,
                                    const SensorSpec& spec,
                                    const Vec3& gravity);

// Casts one ray per ring per azimuth step from the true sensor pose at the
// firing instant and keeps the nearest in-range hit, expressed in the sensor
// frame at that instant (per-point motion distortion included).
std::vector<TimedPoint> simulate_lidar(const Trajectory& traj,
                                       const WorldModel& world,
                                       const SensorSpec& spec);

std::vector<SweepBoundary> sweep_boundaries(const Trajectory& traj,
                                            const LidarSpec& lidar);

struct Scenario {
  std::string name = "custom";
  Trajectory trajectory = Trajectory::make_static(1.0);
  WorldModel world;
  SensorSpec sensor;
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);
};

// Presets: static, corridor, corridor_noisy, circle, figure_eight.
Scenario make_preset(const std::string& name);
bool is_preset(const std::string& name);

// Writes points.csv, sweeps.csv, imu.csv, gt.tum and manifest.json.
// Deterministic for a fixed scenario seed.
void export_scenario(const Scenario& scenario, const std::string& out_dir);

// Reads a manifest.json produced by export_scenario (or hand-written with
// the same keys) and rebuilds the scenario.
Scenario load_manifest(const std::string& path);

}  // namespace sweeplio
