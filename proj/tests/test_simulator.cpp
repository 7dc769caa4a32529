#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sweeplio/csv_io.hpp"
#include "sweeplio/rng.hpp"
#include "sweeplio/simulator.hpp"
#include "sweeplio/trajectory.hpp"
#include "test_support.hpp"

using namespace sweeplio;

namespace {

double plane_distance(const WorldModel& world, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const WorldPlane& plane : world.planes) {
    best = std::min(best, std::abs(plane.normal.dot(p) + plane.d));
  }
  return best;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("trajectory factories pass their own derivative self-check") {
  CHECK_NOTHROW(Trajectory::make_static(5.0));
  CHECK_NOTHROW(Trajectory::make_constant_velocity(1.0, Vec3::UnitX(), 10.0,
                                                   1.5, 1.0));
  CHECK_NOTHROW(Trajectory::make_circle(4.0, 1.0, 10.0));
  CHECK_NOTHROW(Trajectory::make_figure_eight(5.0, 0.35, 10.0));
  CHECK_THROWS(Trajectory::make_constant_velocity(1.0, Vec3::UnitX(), 10.0,
                                                  1.0, 0.0));
}

TEST_CASE("static sensor in a box room: back-projected points lie on the "
          "walls exactly") {
  Scenario sc = make_preset("static");
  sc.trajectory = Trajectory::make_static(0.3);
  const auto points = simulate_lidar(sc.trajectory, sc.world, sc.sensor);
  REQUIRE(!points.empty());
  for (const TimedPoint& p : points) {
    const Pose sensor_pose = sc.trajectory.pose(p.timestamp) *
                             sc.sensor.extrinsics.lidar_to_imu;
    CHECK(plane_distance(sc.world, sensor_pose * p.position) < 1e-9);
  }
}

TEST_CASE("motion distortion witness: true per-point poses align, a single "
          "fixed pose does not") {
  Scenario sc;
  sc.trajectory = Trajectory::make_circle(4.0, 1.5, 0.5);
  sc.world = WorldModel::box_room(18.0, 18.0, 5.0);
  sc.sensor.lidar.rings = 8;
  sc.sensor.lidar.azimuth_steps = 180;
  const auto points = simulate_lidar(sc.trajectory, sc.world, sc.sensor);
  REQUIRE(!points.empty());

  double max_true = 0.0;
  double max_fixed = 0.0;
  const Pose fixed = sc.trajectory.pose(points.front().timestamp) *
                     sc.sensor.extrinsics.lidar_to_imu;
  for (const TimedPoint& p : points) {
    const Pose true_pose = sc.trajectory.pose(p.timestamp) *
                           sc.sensor.extrinsics.lidar_to_imu;
    max_true = std::max(max_true,
                        plane_distance(sc.world, true_pose * p.position));
    max_fixed = std::max(max_fixed,
                         plane_distance(sc.world, fixed * p.position));
  }
  CHECK(max_true < 1e-9);
  CHECK(max_fixed > 0.01);  // distortion present
}

TEST_CASE("closed room: every ray hits, 360 x 32 gives 11520 points per "
          "sweep") {
  Scenario sc;
  sc.trajectory = Trajectory::make_static(0.2);
  sc.world = WorldModel::box_room(12.0, 10.0, 4.0);
  sc.sensor.lidar.rings = 32;
  sc.sensor.lidar.azimuth_steps = 360;
  sc.sensor.lidar.max_range = 60.0;
  sc.sensor.lidar.min_range = 0.05;
  const auto points = simulate_lidar(sc.trajectory, sc.world, sc.sensor);
  CHECK(points.size() == 2u * 360u * 32u);  // two revolutions in 0.2 s
}

TEST_CASE("circle at radius 10 and 1 m/s measures 0.1 m/s^2 centripetal "
          "acceleration after gravity removal") {
  const Vec3 gravity(0, 0, 9.81);
  Trajectory traj = Trajectory::make_circle(10.0, 1.0, 5.0);
  SensorSpec spec;
  const auto imu = simulate_imu(traj, spec, gravity);
  for (size_t i = 10; i < imu.size(); i += 50) {
    const Quat q = traj.orientation(imu[i].timestamp);
    const Vec3 specific_force_world = q * imu[i].accel;
    const Vec3 accel_world = specific_force_world - gravity;
    CHECK(accel_world.norm() == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("IMU output with a fixed seed is bit-identical across runs") {
  Scenario sc = make_preset("corridor_noisy");
  const auto a = simulate_imu(sc.trajectory, sc.sensor, sc.gravity);
  const auto b = simulate_imu(sc.trajectory, sc.sensor, sc.gravity);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].accel == b[i].accel);
    CHECK(a[i].gyro == b[i].gyro);
  }
}

TEST_CASE("counter RNG is deterministic and roughly standard normal") {
  CounterRng rng1(42), rng2(42);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng1.gaussian();
    CHECK(x == rng2.gaussian());
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("noiseless IMU integrated by the fine-step oracle reproduces the "
          "analytic trajectory") {
  const Vec3 gravity(0, 0, 9.81);
  Trajectory traj = Trajectory::make_circle(4.0, 1.0, 1.5);
  SensorSpec spec;
  const auto imu = simulate_imu(traj, spec, gravity);
  const auto sliced = slice_window(imu, 0.0, 1.0);
  const auto terms = test::fine_integrate(sliced, Vec3::Zero(), Vec3::Zero(),
                                          40);
  // compose the gravity-free terms with the known initial state
  const Vec3 p0 = traj.position(0.0);
  const Vec3 v0 = traj.velocity(0.0);
  const Quat q0 = traj.orientation(0.0);
  const double T = 1.0;
  const Vec3 p_pred = p0 + v0 * T + q0 * terms.alpha - 0.5 * gravity * T * T;
  CHECK((p_pred - traj.position(T)).norm() < 1e-5);
  const Quat q_pred = (q0 * terms.gamma).normalized();
  CHECK(q_pred.angularDistance(traj.orientation(T)) < 1e-5);
}

TEST_CASE("export/reingest round trip and stable manifest bytes") {
  namespace fs = std::filesystem;
  Scenario sc;
  sc.name = "roundtrip";
  sc.trajectory = Trajectory::make_static(0.3);
  sc.world = WorldModel::box_room(10.0, 8.0, 4.0);
  sc.sensor.lidar.rings = 4;
  sc.sensor.lidar.azimuth_steps = 60;
  sc.sensor.noisy = true;
  sc.sensor.seed = 17;

  const fs::path dir1 = fs::temp_directory_path() / "sweeplio_scenario_a";
  const fs::path dir2 = fs::temp_directory_path() / "sweeplio_scenario_b";
  export_scenario(sc, dir1.string());
  export_scenario(sc, dir2.string());

  for (const char* name :
       {"points.csv", "imu.csv", "sweeps.csv", "gt.tum", "manifest.json"}) {
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }

  // files parse and match the generators
  const auto points = read_points_csv((dir1 / "points.csv").string());
  const auto direct = simulate_lidar(sc.trajectory, sc.world, sc.sensor);
  REQUIRE(points.size() == direct.size());
  for (size_t i = 0; i < points.size(); i += 97) {
    CHECK((points[i].position - direct[i].position).norm() < 1e-9);
    CHECK(points[i].timestamp ==
          doctest::Approx(direct[i].timestamp).epsilon(1e-12));
  }
  const auto imu = read_imu_csv((dir1 / "imu.csv").string());
  CHECK(!imu.empty());
  const auto gt = read_tum((dir1 / "gt.tum").string());
  CHECK(gt.front().timestamp == 0.0);
  CHECK(gt.back().timestamp >= sc.trajectory.duration() - 0.011);

  // manifest round trip reproduces the scenario bit-exactly
  const Scenario loaded = load_manifest((dir1 / "manifest.json").string());
  const auto imu_again = simulate_imu(loaded.trajectory, loaded.sensor,
                                      loaded.gravity);
  const auto imu_direct = simulate_imu(sc.trajectory, sc.sensor, sc.gravity);
  REQUIRE(imu_again.size() == imu_direct.size());
  for (size_t i = 0; i < imu_again.size(); i += 13) {
    CHECK(imu_again[i].accel == imu_direct[i].accel);
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("ground-truth file covers the duration at a fixed rate") {
  namespace fs = std::filesystem;
  Scenario sc;
  sc.trajectory = Trajectory::make_static(0.5);
  sc.world = WorldModel::box_room(10.0, 8.0, 4.0);
  sc.sensor.lidar.rings = 2;
  sc.sensor.lidar.azimuth_steps = 30;
  const fs::path dir = fs::temp_directory_path() / "sweeplio_scenario_gt";
  export_scenario(sc, dir.string());
  const auto gt = read_tum((dir / "gt.tum").string());
  REQUIRE(gt.size() >= 50);
  for (size_t i = 1; i < gt.size(); ++i) {
    CHECK(gt[i].timestamp - gt[i - 1].timestamp ==
          doctest::Approx(0.01).epsilon(1e-9));
  }
  fs::remove_all(dir);
}

TEST_CASE("all presets construct") {
  for (const char* name :
       {"static", "corridor", "corridor_noisy", "circle", "figure_eight"}) {
    CHECK(is_preset(name));
    CHECK_NOTHROW(make_preset(name));
  }
  CHECK(!is_preset("warehouse"));
  CHECK_THROWS_AS(make_preset("warehouse"), ConfigError);
}
