#pragma once

#include <string>

#include "sweeplio/geometry.hpp"
#include "sweeplio/imu.hpp"
#include "sweeplio/optimizer.hpp"

namespace sweeplio {

struct PipelineConfig {
  // inputs
  std::string points_csv;
  std::string imu_csv;
  std::string sweeps_csv;  // packet mode when set, stream mode otherwise
  double segment_period = 1.0 / 30.0;  // stream-mode cut period (s)

  Extrinsics extrinsics;

  // cloud processing
  double downsample_voxel = 0.5;
  double segment_gap_tol = 5e-3;

  // map
  double map_voxel = 1.0;
  int map_max_points = 20;
  double map_min_gap = 0.1;
  double prune_radius = 150.0;
  double min_point_spacing = 0.0;

  // initialization
  std::string init_mode = "static";  // static | motion
  double init_window = 1.0;
  double gravity_norm = 9.81;

  // IMU
  NoiseParams noise;
  double imu_upsample_hz = 0.0;  // 0 disables upsampling

  SolverConfig solver;
};

// Flat "key = value" file with '#' comments. Unknown keys are errors; every
// key has a documented default (see config_reference()). Referenced input
// files must exist.
PipelineConfig load_config(const std::string& path);

// Parses without touching the filesystem (missing input paths allowed).
PipelineConfig parse_config_text(const std::string& text);

void write_config(const PipelineConfig& cfg, const std::string& path);

// Human-readable reference of every key, its default and meaning.
std::string config_reference();

}  // namespace sweeplio
