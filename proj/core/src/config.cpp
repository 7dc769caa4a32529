#include "sweeplio/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sweeplio/errors.hpp"

namespace sweeplio {

namespace {

struct KeySpec {
  const char* key;
  const char* meaning;
  std::string default_value;
  std::function<void(PipelineConfig&, const std::string&)> apply;
};

double parse_double(const std::string& key, const std::string& value) {
  size_t used = 0;
  double out;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" +
                      value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("config: key '" + key + "' has trailing junk in '" +
                      value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const double d = parse_double(key, value);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" +
                      value + "'");
  }
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" +
                    value + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

#define NUM_KEY(name, field, doc) \
  {name, doc, fmt(PipelineConfig{}.field), \
   [](PipelineConfig& c, const std::string& v) { \
     c.field = parse_double(name, v); \
   }}
#define INT_KEY(name, field, doc) \
  {name, doc, fmt(PipelineConfig{}.field), \
   [](PipelineConfig& c, const std::string& v) { \
     c.field = parse_int(name, v); \
   }}
#define BOOL_KEY(name, field, doc) \
  {name, doc, PipelineConfig{}.field ? "true" : "false", \
   [](PipelineConfig& c, const std::string& v) { \
     c.field = parse_bool(name, v); \
   }}
#define STR_KEY(name, field, doc) \
  {name, doc, PipelineConfig{}.field, \
   [](PipelineConfig& c, const std::string& v) { c.field = v; }}

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      STR_KEY("points_csv", points_csv,
              "point stream CSV (header t,x,y,z; seconds, meters)"),
      STR_KEY("imu_csv", imu_csv,
              "IMU CSV (header t,ax,ay,az,gx,gy,gz; SI units)"),
      STR_KEY("sweeps_csv", sweeps_csv,
              "sweep boundary index CSV (sweep_id,t_begin,t_end); packet "
              "mode when set, stream mode when empty"),
      NUM_KEY("segment_period", segment_period,
              "stream-mode segment cut period in seconds (raw period / 3)"),
      {"ext_t_x", "lidar-to-imu translation x (m)", "0",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.translation.x() = parse_double("ext_t_x", v);
       }},
      {"ext_t_y", "lidar-to-imu translation y (m)", "0",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.translation.y() = parse_double("ext_t_y", v);
       }},
      {"ext_t_z", "lidar-to-imu translation z (m)", "0",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.translation.z() = parse_double("ext_t_z", v);
       }},
      {"ext_q_w", "lidar-to-imu rotation quaternion w", "1",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.rotation.w() = parse_double("ext_q_w", v);
       }},
      {"ext_q_x", "lidar-to-imu rotation quaternion x", "0",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.rotation.x() = parse_double("ext_q_x", v);
       }},
      {"ext_q_y", "lidar-to-imu rotation quaternion y", "0",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.rotation.y() = parse_double("ext_q_y", v);
       }},
      {"ext_q_z", "lidar-to-imu rotation quaternion z", "0",
       [](PipelineConfig& c, const std::string& v) {
         c.extrinsics.lidar_to_imu.rotation.z() = parse_double("ext_q_z", v);
       }},
      NUM_KEY("downsample_voxel", downsample_voxel,
              "down-sampling voxel size in meters (one point kept per cell)"),
      NUM_KEY("segment_gap_tol", segment_gap_tol,
              "max tolerated gap between consecutive segments (s)"),
      NUM_KEY("map_voxel", map_voxel, "map voxel size in meters"),
      INT_KEY("map_max_points", map_max_points,
              "max stored points per map voxel"),
      NUM_KEY("map_min_gap", map_min_gap,
              "min time between map insertion events (s)"),
      NUM_KEY("prune_radius", prune_radius,
              "map cells farther than this from the current position are "
              "dropped (m)"),
      NUM_KEY("min_point_spacing", min_point_spacing,
              "optional min spacing between points inside one map cell (m, "
              "0 = disabled)"),
      STR_KEY("init_mode", init_mode,
              "initialization mode: static (stationary start) or motion "
              "(LiDAR-only bootstrap)"),
      NUM_KEY("init_window", init_window,
              "static initialization averaging window (s)"),
      NUM_KEY("gravity_norm", gravity_norm,
              "gravity magnitude G (m/s^2)"),
      NUM_KEY("sigma_a", noise.sigma_a,
              "accelerometer noise density (m/s^2)"),
      NUM_KEY("sigma_w", noise.sigma_w, "gyroscope noise density (rad/s)"),
      NUM_KEY("sigma_ba", noise.sigma_ba,
              "accelerometer bias random walk"),
      NUM_KEY("sigma_bw", noise.sigma_bw, "gyroscope bias random walk"),
      NUM_KEY("imu_upsample_hz", imu_upsample_hz,
              "linearly upsample the IMU stream to this rate (0 = off)"),
      INT_KEY("registrations", solver.registrations,
              "point re-association passes per window"),
      INT_KEY("iterations", solver.iterations,
              "damped Gauss-Newton steps per registration"),
      NUM_KEY("huber_delta", solver.huber_delta,
              "Huber threshold on the whitened point residual"),
      NUM_KEY("p_l", solver.p_l, "point-to-plane residual variance"),
      NUM_KEY("tol", solver.tol, "update-norm early-termination threshold"),
      INT_KEY("min_points", solver.min_points,
              "min surviving point residuals per window"),
      NUM_KEY("plane_fit_max_dist", solver.plane_fit_max_dist,
              "reject plane fits with any neighbor farther than this from "
              "the plane (m)"),
      NUM_KEY("consistency_weight_pose", solver.consistency_weight_pose,
              "consistency-tie information on the begin pose rows"),
      NUM_KEY("consistency_weight_vb", solver.consistency_weight_vb,
              "consistency-tie information on the begin velocity/bias rows"),
      NUM_KEY("plane_rms_max", solver.plane_rms_max,
              "reject plane fits whose neighbor rms distance exceeds this "
              "(m)"),
      NUM_KEY("max_assoc_dist", solver.max_assoc_dist,
              "skip point residuals farther than this from their plane (m)"),
      BOOL_KEY("multi_segment", solver.multi_segment,
               "include the first segment's IMU block (false reproduces the "
               "reduced single-segment coupling)"),
  };
  return specs;
}

#undef NUM_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef STR_KEY

void check_ranges(const PipelineConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) {
      throw ConfigError(std::string("config: key '") + key +
                        "' must be positive");
    }
  };
  positive(c.segment_period, "segment_period");
  positive(c.downsample_voxel, "downsample_voxel");
  positive(c.map_voxel, "map_voxel");
  positive(c.map_min_gap, "map_min_gap");
  positive(c.prune_radius, "prune_radius");
  positive(c.init_window, "init_window");
  positive(c.gravity_norm, "gravity_norm");
  positive(c.noise.sigma_a, "sigma_a");
  positive(c.noise.sigma_w, "sigma_w");
  positive(c.noise.sigma_ba, "sigma_ba");
  positive(c.noise.sigma_bw, "sigma_bw");
  positive(c.solver.huber_delta, "huber_delta");
  positive(c.solver.p_l, "p_l");
  positive(c.solver.tol, "tol");
  positive(c.solver.plane_fit_max_dist, "plane_fit_max_dist");
  positive(c.solver.plane_rms_max, "plane_rms_max");
  positive(c.solver.consistency_weight_pose, "consistency_weight_pose");
  positive(c.solver.consistency_weight_vb, "consistency_weight_vb");
  positive(c.solver.max_assoc_dist, "max_assoc_dist");
  if (c.map_max_points < 1) {
    throw ConfigError("config: map_max_points must be >= 1");
  }
  if (c.solver.registrations < 1 || c.solver.iterations < 1) {
    throw ConfigError("config: registrations and iterations must be >= 1");
  }
  if (c.solver.min_points < 1) {
    throw ConfigError("config: min_points must be >= 1");
  }
  if (c.init_mode != "static" && c.init_mode != "motion") {
    throw ConfigError("config: init_mode must be 'static' or 'motion'");
  }
  if (c.extrinsics.lidar_to_imu.rotation.norm() < 1e-9) {
    throw ConfigError("config: extrinsic quaternion must be nonzero");
  }
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto& specs = key_specs();
    const auto it = std::find_if(
        specs.begin(), specs.end(),
        [&key](const KeySpec& s) { return key == s.key; });
    if (it == specs.end()) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": unknown key '" + key + "'");
    }
    it->apply(cfg, value);
  }
  cfg.extrinsics.lidar_to_imu =
      Pose(cfg.extrinsics.lidar_to_imu.rotation,
           cfg.extrinsics.lidar_to_imu.translation);
  check_ranges(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  PipelineConfig cfg = parse_config_text(buf.str());

  namespace fs = std::filesystem;
  auto must_exist = [](const std::string& p, const char* key) {
    if (p.empty()) {
      throw ConfigError(std::string("config: '") + key + "' is required");
    }
    if (!fs::exists(p)) {
      throw ConfigError(std::string("config: ") + key + " file not found: " +
                        p);
    }
  };
  must_exist(cfg.points_csv, "points_csv");
  must_exist(cfg.imu_csv, "imu_csv");
  if (!cfg.sweeps_csv.empty() && !fs::exists(cfg.sweeps_csv)) {
    throw ConfigError("config: sweeps_csv file not found: " + cfg.sweeps_csv);
  }
  return cfg;
}

void write_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write config file: " + path);
  const Pose& ext = cfg.extrinsics.lidar_to_imu;
  f << "points_csv = " << cfg.points_csv << "\n";
  f << "imu_csv = " << cfg.imu_csv << "\n";
  if (!cfg.sweeps_csv.empty()) f << "sweeps_csv = " << cfg.sweeps_csv << "\n";
  f << "segment_period = " << fmt(cfg.segment_period) << "\n";
  f << "ext_t_x = " << fmt(ext.translation.x()) << "\n";
  f << "ext_t_y = " << fmt(ext.translation.y()) << "\n";
  f << "ext_t_z = " << fmt(ext.translation.z()) << "\n";
  f << "ext_q_w = " << fmt(ext.rotation.w()) << "\n";
  f << "ext_q_x = " << fmt(ext.rotation.x()) << "\n";
  f << "ext_q_y = " << fmt(ext.rotation.y()) << "\n";
  f << "ext_q_z = " << fmt(ext.rotation.z()) << "\n";
  f << "downsample_voxel = " << fmt(cfg.downsample_voxel) << "\n";
  f << "segment_gap_tol = " << fmt(cfg.segment_gap_tol) << "\n";
  f << "map_voxel = " << fmt(cfg.map_voxel) << "\n";
  f << "map_max_points = " << cfg.map_max_points << "\n";
  f << "map_min_gap = " << fmt(cfg.map_min_gap) << "\n";
  f << "prune_radius = " << fmt(cfg.prune_radius) << "\n";
  f << "min_point_spacing = " << fmt(cfg.min_point_spacing) << "\n";
  f << "init_mode = " << cfg.init_mode << "\n";
  f << "init_window = " << fmt(cfg.init_window) << "\n";
  f << "gravity_norm = " << fmt(cfg.gravity_norm) << "\n";
  f << "sigma_a = " << fmt(cfg.noise.sigma_a) << "\n";
  f << "sigma_w = " << fmt(cfg.noise.sigma_w) << "\n";
  f << "sigma_ba = " << fmt(cfg.noise.sigma_ba) << "\n";
  f << "sigma_bw = " << fmt(cfg.noise.sigma_bw) << "\n";
  f << "imu_upsample_hz = " << fmt(cfg.imu_upsample_hz) << "\n";
  f << "registrations = " << cfg.solver.registrations << "\n";
  f << "iterations = " << cfg.solver.iterations << "\n";
  f << "huber_delta = " << fmt(cfg.solver.huber_delta) << "\n";
  f << "p_l = " << fmt(cfg.solver.p_l) << "\n";
  f << "tol = " << fmt(cfg.solver.tol) << "\n";
  f << "min_points = " << cfg.solver.min_points << "\n";
  f << "plane_fit_max_dist = " << fmt(cfg.solver.plane_fit_max_dist) << "\n";
  f << "plane_rms_max = " << fmt(cfg.solver.plane_rms_max) << "\n";
  f << "max_assoc_dist = " << fmt(cfg.solver.max_assoc_dist) << "\n";
  f << "consistency_weight_pose = " << fmt(cfg.solver.consistency_weight_pose)
    << "\n";
  f << "consistency_weight_vb = " << fmt(cfg.solver.consistency_weight_vb)
    << "\n";
  f << "multi_segment = " << (cfg.solver.multi_segment ? "true" : "false")
    << "\n";
}

std::string config_reference() {
  std::ostringstream out;
  out << "Config file keys (flat 'key = value' lines, '#' comments):\n";
  for (const KeySpec& s : key_specs()) {
    out << "  " << s.key << " (default: "
        << (s.default_value.empty() ? "<empty>" : s.default_value)
        << ")\n      " << s.meaning << "\n";
  }
  return out.str();
}

}  // namespace sweeplio
