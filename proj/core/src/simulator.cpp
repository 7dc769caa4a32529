#include "sweeplio/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sweeplio/csv_io.hpp"
#include "sweeplio/rng.hpp"
#include "sweeplio/trajectory.hpp"

namespace sweeplio {

namespace {

Quat yaw_quat(double psi) {
  return Quat(Eigen::AngleAxisd(psi, Vec3::UnitZ()));
}

}  // namespace

void Trajectory::validate() const {
  const double h = 1e-5;
  for (int i = 0; i < 23; ++i) {
    const double t =
        (0.031 + 0.0413 * i) * duration_;  // avoids piecewise joins
    if (t < h || t > duration_ - h) continue;
    const Vec3 v_fd = (position_(t + h) - position_(t - h)) / (2.0 * h);
    const Vec3 a_fd = (velocity_(t + h) - velocity_(t - h)) / (2.0 * h);
    const Vec3 w_fd =
        quat_log(orientation_(t - h).conjugate() * orientation_(t + h)) /
        (2.0 * h);
    const double tol_v = 1e-5 * (1.0 + velocity_(t).norm());
    const double tol_a = 1e-4 * (1.0 + acceleration_(t).norm());
    const double tol_w = 1e-4 * (1.0 + angular_rate_(t).norm());
    if ((v_fd - velocity_(t)).norm() > tol_v ||
        (a_fd - acceleration_(t)).norm() > tol_a ||
        (w_fd - angular_rate_(t)).norm() > tol_w) {
      throw std::logic_error(
          "Trajectory: analytic derivatives disagree with finite "
          "differences at t=" +
          std::to_string(t));
    }
  }
}

Trajectory Trajectory::make_static(double duration) {
  Trajectory traj;
  traj.kind_ = Kind::kStatic;
  traj.duration_ = duration;
  traj.params_ = {{"duration", duration}};
  traj.position_ = [](double) { return Vec3::Zero(); };
  traj.orientation_ = [](double) { return Quat::Identity(); };
  traj.velocity_ = [](double) { return Vec3::Zero(); };
  traj.acceleration_ = [](double) { return Vec3::Zero(); };
  traj.angular_rate_ = [](double) { return Vec3::Zero(); };
  traj.validate();
  return traj;
}

Trajectory Trajectory::make_constant_velocity(double speed,
                                              const Vec3& direction,
                                              double duration, double lead_in,
                                              double ramp) {
  if (ramp <= 0.0 && lead_in > 0.0) {
    throw std::logic_error(
        "constant_velocity: a static lead-in needs a smooth ramp");
  }
  Trajectory traj;
  traj.kind_ = Kind::kConstantVelocity;
  traj.duration_ = duration;
  const Vec3 dir = direction.normalized();
  traj.params_ = {{"speed", speed},     {"dir_x", dir.x()},
                  {"dir_y", dir.y()},   {"dir_z", dir.z()},
                  {"duration", duration}, {"lead_in", lead_in},
                  {"ramp", ramp}};

  // quintic speed profile: C2 at both ends of the ramp
  auto s = [](double u) { return ((6.0 * u - 15.0) * u + 10.0) * u * u * u; };
  auto ds = [](double u) { return ((30.0 * u - 60.0) * u + 30.0) * u * u; };
  auto S = [](double u) {
    return ((u - 3.0) * u + 2.5) * u * u * u * u;  // integral of s
  };

  traj.position_ = [=](double t) -> Vec3 {
    if (ramp <= 0.0) return dir * (speed * t);
    if (t <= lead_in) return Vec3::Zero();
    const double u = (t - lead_in) / ramp;
    if (u < 1.0) return dir * (speed * ramp * S(u));
    return dir * (speed * (ramp * S(1.0) + (t - lead_in - ramp)));
  };
  traj.velocity_ = [=](double t) -> Vec3 {
    if (ramp <= 0.0) return dir * speed;
    if (t <= lead_in) return Vec3::Zero();
    const double u = (t - lead_in) / ramp;
    return dir * (speed * (u < 1.0 ? s(u) : 1.0));
  };
  traj.acceleration_ = [=](double t) -> Vec3 {
    if (ramp <= 0.0 || t <= lead_in) return Vec3::Zero();
    const double u = (t - lead_in) / ramp;
    if (u >= 1.0) return Vec3::Zero();
    return dir * (speed * ds(u) / ramp);
  };
  traj.orientation_ = [](double) { return Quat::Identity(); };
  traj.angular_rate_ = [](double) { return Vec3::Zero(); };
  traj.validate();
  return traj;
}

Trajectory Trajectory::make_circle(double radius, double speed,
                                   double duration, double height) {
  Trajectory traj;
  traj.kind_ = Kind::kCircle;
  traj.duration_ = duration;
  traj.params_ = {{"radius", radius},
                  {"speed", speed},
                  {"duration", duration},
                  {"height", height}};
  const double w = speed / radius;
  traj.position_ = [=](double t) {
    return Vec3(radius * std::cos(w * t), radius * std::sin(w * t), height);
  };
  traj.velocity_ = [=](double t) {
    return Vec3(-radius * w * std::sin(w * t), radius * w * std::cos(w * t),
                0.0);
  };
  traj.acceleration_ = [=](double t) {
    return Vec3(-radius * w * w * std::cos(w * t),
                -radius * w * w * std::sin(w * t), 0.0);
  };
  traj.orientation_ = [=](double t) { return yaw_quat(w * t + M_PI / 2.0); };
  traj.angular_rate_ = [=](double) { return Vec3(0.0, 0.0, w); };
  traj.validate();
  return traj;
}

Trajectory Trajectory::make_figure_eight(double half_width,
                                         double angular_rate, double duration,
                                         double height) {
  Trajectory traj;
  traj.kind_ = Kind::kFigureEight;
  traj.duration_ = duration;
  traj.params_ = {{"half_width", half_width},
                  {"angular_rate", angular_rate},
                  {"duration", duration},
                  {"height", height}};
  const double a = half_width;
  const double w = angular_rate;
  // Gerono lemniscate with yaw tracking the velocity direction
  traj.position_ = [=](double t) {
    const double th = w * t;
    return Vec3(a * std::sin(th), 0.5 * a * std::sin(2.0 * th), height);
  };
  auto vel = [=](double t) {
    const double th = w * t;
    return Vec3(a * w * std::cos(th), a * w * std::cos(2.0 * th), 0.0);
  };
  auto acc = [=](double t) {
    const double th = w * t;
    return Vec3(-a * w * w * std::sin(th),
                -2.0 * a * w * w * std::sin(2.0 * th), 0.0);
  };
  traj.velocity_ = vel;
  traj.acceleration_ = acc;
  traj.orientation_ = [=](double t) {
    const Vec3 v = vel(t);
    return yaw_quat(std::atan2(v.y(), v.x()));
  };
  traj.angular_rate_ = [=](double t) {
    const Vec3 v = vel(t);
    const Vec3 ac = acc(t);
    const double speed2 = v.x() * v.x() + v.y() * v.y();
    return Vec3(0.0, 0.0, (v.x() * ac.y() - v.y() * ac.x()) / speed2);
  };
  traj.validate();
  return traj;
}

WorldPlane WorldPlane::make(const Vec3& center, const Vec3& normal,
                            const Vec3& axis_u, double half_u, double half_v) {
  WorldPlane p;
  p.normal = normal.normalized();
  p.center = center;
  p.axis_u = (axis_u - axis_u.dot(p.normal) * p.normal).normalized();
  p.axis_v = p.normal.cross(p.axis_u);
  p.half_u = half_u;
  p.half_v = half_v;
  p.d = -p.normal.dot(center);
  return p;
}

WorldModel WorldModel::box_room(double length, double width, double height) {
  WorldModel w;
  const double hl = 0.5 * length, hw = 0.5 * width, hh = 0.5 * height;
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();
  w.planes.push_back(WorldPlane::make({0, 0, -hh}, z, x, hl, hw));   // floor
  w.planes.push_back(WorldPlane::make({0, 0, hh}, -z, x, hl, hw));   // ceiling
  w.planes.push_back(WorldPlane::make({0, -hw, 0}, y, x, hl, hh));
  w.planes.push_back(WorldPlane::make({0, hw, 0}, -y, x, hl, hh));
  w.planes.push_back(WorldPlane::make({-hl, 0, 0}, x, y, hw, hh));
  w.planes.push_back(WorldPlane::make({hl, 0, 0}, -x, y, hw, hh));
  return w;
}

WorldModel WorldModel::corridor(double x0, double length, double width,
                                double height) {
  WorldModel w;
  const double hw = 0.5 * width, hh = 0.5 * height;
  const double cx = x0 + 0.5 * length, hl = 0.5 * length;
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();
  w.planes.push_back(WorldPlane::make({cx, 0, -hh}, z, x, hl, hw));
  w.planes.push_back(WorldPlane::make({cx, 0, hh}, -z, x, hl, hw));
  w.planes.push_back(WorldPlane::make({cx, -hw, 0}, y, x, hl, hh));
  w.planes.push_back(WorldPlane::make({cx, hw, 0}, -y, x, hl, hh));
  w.planes.push_back(WorldPlane::make({x0, 0, 0}, x, y, hw, hh));
  w.planes.push_back(WorldPlane::make({x0 + length, 0, 0}, -x, y, hw, hh));
  return w;
}

std::vector<ImuSample> simulate_imu(const Trajectory& traj,
                                    const SensorSpec& spec,
                                    const Vec3& gravity) {
  CounterRng rng(spec.seed);
  std::vector<ImuSample> out;
  const double dt = 1.0 / spec.imu_rate;
  const long count =
      static_cast<long>(std::ceil(traj.duration() * spec.imu_rate)) + 3;
  out.reserve(count);
  for (long k = 0; k < count; ++k) {
    const double t = k * dt;
    const Mat3 R_wb = traj.orientation(t).toRotationMatrix();
    ImuSample s;
    s.timestamp = t;
    s.accel =
        R_wb.transpose() * (traj.acceleration(t) + gravity) + spec.accel_bias;
    s.gyro = traj.angular_rate_body(t) + spec.gyro_bias;
    if (spec.noisy) {
      s.accel += spec.noise.sigma_a *
                 Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
      s.gyro += spec.noise.sigma_w *
                Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
    }
    out.push_back(s);
  }
  return out;
}

namespace {

// all rays of one revolution; shared by the batch and streaming paths
void lidar_rev_points(const Trajectory& traj, const WorldModel& world,
                      const SensorSpec& spec, long rev,
                      std::vector<TimedPoint>& out) {
  const LidarSpec& lidar = spec.lidar;
  const double rev_t = 1.0 / lidar.rev_rate;
  const double deg = M_PI / 180.0;
  for (int s = 0; s < lidar.azimuth_steps; ++s) {
    const double t =
        (static_cast<double>(rev) + static_cast<double>(s) /
                                        lidar.azimuth_steps) *
        rev_t;
    if (t > traj.duration()) return;
    const Pose sensor_pose = traj.pose(t) * spec.extrinsics.lidar_to_imu;
    const Mat3 R_ws = sensor_pose.rotation.toRotationMatrix();
    const Vec3 origin = sensor_pose.translation;
    const double azimuth = 2.0 * M_PI * s / lidar.azimuth_steps;
    for (int m = 0; m < lidar.rings; ++m) {
      const double elev =
          lidar.rings == 1
              ? 0.5 * (lidar.elevation_min_deg + lidar.elevation_max_deg) * deg
              : (lidar.elevation_min_deg +
                 (lidar.elevation_max_deg - lidar.elevation_min_deg) * m /
                     (lidar.rings - 1)) *
                    deg;
      const Vec3 dir_s(std::cos(elev) * std::cos(azimuth),
                       std::cos(elev) * std::sin(azimuth), std::sin(elev));
      const Vec3 dir_w = R_ws * dir_s;

      double best = lidar.max_range;
      bool hit = false;
      Vec3 hit_point = Vec3::Zero();
      for (const WorldPlane& plane : world.planes) {
        const double denom = plane.normal.dot(dir_w);
        if (std::abs(denom) < 1e-12) continue;
        const double range = -(plane.normal.dot(origin) + plane.d) / denom;
        if (range < lidar.min_range || range >= best) continue;
        const Vec3 h = origin + range * dir_w;
        const Vec3 rel = h - plane.center;
        if (std::abs(rel.dot(plane.axis_u)) > plane.half_u + 1e-9 ||
            std::abs(rel.dot(plane.axis_v)) > plane.half_v + 1e-9) {
          continue;
        }
        best = range;
        hit = true;
        hit_point = h;
      }
      if (hit) {
        out.push_back({R_ws.transpose() * (hit_point - origin), t});
      }
    }
  }
}

}  // namespace

std::vector<TimedPoint> simulate_lidar(const Trajectory& traj,
                                       const WorldModel& world,
                                       const SensorSpec& spec) {
  std::vector<TimedPoint> out;
  const long revs = static_cast<long>(
      std::floor(traj.duration() * spec.lidar.rev_rate + 1e-9));
  for (long rev = 0; rev < revs; ++rev) {
    lidar_rev_points(traj, world, spec, rev, out);
  }
  return out;
}

std::vector<SweepBoundary> sweep_boundaries(const Trajectory& traj,
                                            const LidarSpec& lidar) {
  std::vector<SweepBoundary> out;
  const long revs =
      static_cast<long>(std::floor(traj.duration() * lidar.rev_rate + 1e-9));
  for (long rev = 0; rev < revs; ++rev) {
    out.push_back({rev, rev / lidar.rev_rate, (rev + 1) / lidar.rev_rate});
  }
  return out;
}

bool is_preset(const std::string& name) {
  return name == "static" || name == "corridor" || name == "corridor_noisy" ||
         name == "circle" || name == "figure_eight";
}

Scenario make_preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "static") {
    sc.trajectory = Trajectory::make_static(10.0);
    sc.world = WorldModel::box_room(12.0, 10.0, 4.0);
    sc.sensor.lidar.elevation_min_deg = -30.0;
    sc.sensor.lidar.elevation_max_deg = 10.0;
    sc.sensor.seed = 7;
  } else if (name == "corridor" || name == "corridor_noisy") {
    sc.trajectory =
        Trajectory::make_constant_velocity(1.0, Vec3::UnitX(), 33.0, 1.5, 1.0);
    sc.world = WorldModel::corridor(-6.0, 44.0, 5.0, 4.0);
    sc.sensor.lidar.rings = 16;
    sc.sensor.lidar.azimuth_steps = 240;
    sc.sensor.lidar.elevation_min_deg = -30.0;
    sc.sensor.lidar.elevation_max_deg = 10.0;
    sc.sensor.extrinsics.lidar_to_imu =
        Pose(quat_exp(Vec3(0.0, 0.0, 0.0262)), Vec3(0.08, -0.03, 0.05));
    sc.sensor.seed = 17;
    if (name == "corridor_noisy") {
      sc.sensor.noisy = true;
      sc.sensor.noise.sigma_a = 0.02;
      sc.sensor.noise.sigma_w = 0.002;
      sc.sensor.accel_bias = Vec3(0.02, -0.01, 0.015);
      sc.sensor.gyro_bias = Vec3(0.002, -0.001, 0.0015);
      sc.sensor.seed = 21;
    }
  } else if (name == "circle") {
    sc.trajectory = Trajectory::make_circle(6.0, 1.5, 20.0);
    sc.world = WorldModel::box_room(26.0, 26.0, 6.0);
    sc.sensor.lidar.rings = 16;
    sc.sensor.lidar.azimuth_steps = 240;
    sc.sensor.seed = 11;
  } else if (name == "figure_eight") {
    sc.trajectory = Trajectory::make_figure_eight(5.0, 0.35, 25.0);
    sc.world = WorldModel::box_room(20.0, 14.0, 5.0);
    sc.sensor.lidar.rings = 16;
    sc.sensor.lidar.azimuth_steps = 240;
    sc.sensor.seed = 13;
  } else {
    throw ConfigError("unknown scenario preset: " + name);
  }
  return sc;
}

namespace {

nlohmann::json vec3_to_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Vec3 vec3_from_json(const nlohmann::json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(),
              j.at(2).get<double>());
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  auto get = [&p](const char* key) { return p.at(key).get<double>(); };
  if (kind == "static") {
    return Trajectory::make_static(get("duration"));
  }
  if (kind == "constant_velocity") {
    return Trajectory::make_constant_velocity(
        get("speed"), Vec3(get("dir_x"), get("dir_y"), get("dir_z")),
        get("duration"), get("lead_in"), get("ramp"));
  }
  if (kind == "circle") {
    return Trajectory::make_circle(get("radius"), get("speed"),
                                   get("duration"), get("height"));
  }
  if (kind == "figure_eight") {
    return Trajectory::make_figure_eight(get("half_width"),
                                         get("angular_rate"), get("duration"),
                                         get("height"));
  }
  throw ConfigError("manifest: unknown trajectory kind " + kind);
}

const char* kind_name(Trajectory::Kind kind) {
  switch (kind) {
    case Trajectory::Kind::kStatic: return "static";
    case Trajectory::Kind::kConstantVelocity: return "constant_velocity";
    case Trajectory::Kind::kCircle: return "circle";
    default: return "figure_eight";
  }
}

}  // namespace

void export_scenario(const Scenario& scenario, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);
  const fs::path dir(out_dir);

  const std::vector<ImuSample> imu =
      simulate_imu(scenario.trajectory, scenario.sensor, scenario.gravity);
  write_imu_csv((dir / "imu.csv").string(), imu);

  const std::vector<SweepBoundary> sweeps =
      sweep_boundaries(scenario.trajectory, scenario.sensor.lidar);
  write_sweeps_csv((dir / "sweeps.csv").string(), sweeps);

  {
    PointsCsvWriter writer((dir / "points.csv").string());
    std::vector<TimedPoint> rev_points;
    for (const SweepBoundary& sweep : sweeps) {
      rev_points.clear();
      lidar_rev_points(scenario.trajectory, scenario.world, scenario.sensor,
                       sweep.sweep_id, rev_points);
      for (const TimedPoint& p : rev_points) writer.write(p);
    }
  }

  {
    TrajectoryEstimate gt;
    const double rate = 100.0;
    const long count =
        static_cast<long>(std::floor(scenario.trajectory.duration() * rate)) +
        1;
    gt.reserve(count);
    for (long k = 0; k < count; ++k) {
      const double t = k / rate;
      gt.push_back({t, scenario.trajectory.pose(t)});
    }
    write_tum((dir / "gt.tum").string(), gt);
  }

  nlohmann::json manifest;
  manifest["format"] = "scenario-manifest-v1";
  manifest["name"] = scenario.name;
  manifest["seed"] = scenario.sensor.seed;
  manifest["units"] = {{"time", "s"},
                       {"length", "m"},
                       {"acceleration", "m/s^2"},
                       {"angular_rate", "rad/s"}};
  // world-frame rest specific force (z-up world => (0, 0, G))
  manifest["gravity"] = vec3_to_json(scenario.gravity);
  nlohmann::json traj_params;
  for (const auto& [key, value] : scenario.trajectory.params()) {
    traj_params[key] = value;
  }
  manifest["trajectory"] = {{"kind", kind_name(scenario.trajectory.kind())},
                            {"params", traj_params}};
  nlohmann::json planes = nlohmann::json::array();
  for (const WorldPlane& p : scenario.world.planes) {
    planes.push_back({{"center", vec3_to_json(p.center)},
                      {"normal", vec3_to_json(p.normal)},
                      {"axis_u", vec3_to_json(p.axis_u)},
                      {"half_u", p.half_u},
                      {"half_v", p.half_v}});
  }
  manifest["world"] = {{"planes", planes}};
  const SensorSpec& sensor = scenario.sensor;
  manifest["sensor"] = {
      {"lidar",
       {{"rings", sensor.lidar.rings},
        {"azimuth_steps", sensor.lidar.azimuth_steps},
        {"rev_rate", sensor.lidar.rev_rate},
        {"max_range", sensor.lidar.max_range},
        {"min_range", sensor.lidar.min_range},
        {"elevation_min_deg", sensor.lidar.elevation_min_deg},
        {"elevation_max_deg", sensor.lidar.elevation_max_deg}}},
      {"imu_rate", sensor.imu_rate},
      {"noisy", sensor.noisy},
      {"sigma_a", sensor.noise.sigma_a},
      {"sigma_w", sensor.noise.sigma_w},
      {"sigma_ba", sensor.noise.sigma_ba},
      {"sigma_bw", sensor.noise.sigma_bw},
      {"accel_bias", vec3_to_json(sensor.accel_bias)},
      {"gyro_bias", vec3_to_json(sensor.gyro_bias)},
      {"extrinsics",
       {{"t", vec3_to_json(sensor.extrinsics.lidar_to_imu.translation)},
        {"q_wxyz",
         {sensor.extrinsics.lidar_to_imu.rotation.w(),
          sensor.extrinsics.lidar_to_imu.rotation.x(),
          sensor.extrinsics.lidar_to_imu.rotation.y(),
          sensor.extrinsics.lidar_to_imu.rotation.z()}}}}};

  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw IoError("cannot write manifest in " + out_dir);
  mf << manifest.dump(2) << "\n";
}

Scenario load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed manifest " + path + ": " + e.what());
  }
  try {
    Scenario sc;
    sc.name = j.at("name").get<std::string>();
    sc.gravity = vec3_from_json(j.at("gravity"));
    sc.trajectory = trajectory_from_json(j.at("trajectory"));
    sc.world.planes.clear();
    for (const auto& jp : j.at("world").at("planes")) {
      sc.world.planes.push_back(WorldPlane::make(
          vec3_from_json(jp.at("center")), vec3_from_json(jp.at("normal")),
          vec3_from_json(jp.at("axis_u")), jp.at("half_u").get<double>(),
          jp.at("half_v").get<double>()));
    }
    const auto& js = j.at("sensor");
    const auto& jl = js.at("lidar");
    sc.sensor.lidar.rings = jl.at("rings").get<int>();
    sc.sensor.lidar.azimuth_steps = jl.at("azimuth_steps").get<int>();
    sc.sensor.lidar.rev_rate = jl.at("rev_rate").get<double>();
    sc.sensor.lidar.max_range = jl.at("max_range").get<double>();
    sc.sensor.lidar.min_range = jl.at("min_range").get<double>();
    sc.sensor.lidar.elevation_min_deg =
        jl.at("elevation_min_deg").get<double>();
    sc.sensor.lidar.elevation_max_deg =
        jl.at("elevation_max_deg").get<double>();
    sc.sensor.imu_rate = js.at("imu_rate").get<double>();
    sc.sensor.noisy = js.at("noisy").get<bool>();
    sc.sensor.noise.sigma_a = js.at("sigma_a").get<double>();
    sc.sensor.noise.sigma_w = js.at("sigma_w").get<double>();
    sc.sensor.noise.sigma_ba = js.at("sigma_ba").get<double>();
    sc.sensor.noise.sigma_bw = js.at("sigma_bw").get<double>();
    sc.sensor.accel_bias = vec3_from_json(js.at("accel_bias"));
    sc.sensor.gyro_bias = vec3_from_json(js.at("gyro_bias"));
    const auto& je = js.at("extrinsics");
    const auto& q = je.at("q_wxyz");
    sc.sensor.extrinsics.lidar_to_imu =
        Pose(Quat(q.at(0).get<double>(), q.at(1).get<double>(),
                  q.at(2).get<double>(), q.at(3).get<double>()),
             vec3_from_json(je.at("t")));
    sc.sensor.seed = j.at("seed").get<uint64_t>();
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + path + " missing keys: " + e.what());
  }
}

}  // namespace sweeplio
