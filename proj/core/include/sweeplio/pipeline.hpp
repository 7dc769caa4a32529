#pragma once

#include <string>

#include "sweeplio/config.hpp"
#include "sweeplio/trajectory.hpp"

namespace sweeplio {

// Per-sweep wall-time split mirroring the usual breakdown columns.
struct StageTimings {
  double sweep_reconstruction_ms = 0.0;
  double lio_optimization_ms = 0.0;
  double map_update_ms = 0.0;
  double total_ms = 0.0;
};

struct RunResult {
  TrajectoryEstimate trajectory;
  long raw_inputs = 0;             // sweeps (packet) or points (stream)
  long reconstructed_sweeps = 0;
  long windows_solved = 0;
  long dropped_data_events = 0;
  size_t map_points = 0;
  double mean_point_residuals = 0.0;
  StageTimings mean_per_sweep;
  StageTimings total;
};

// Full pipeline: ingest -> sweep reconstruction -> initialization ->
// per-sweep {pre-integrate, predict, window solve, gated map update, prune}
// -> trajectory + map + report files in out_dir. On failure the partial
// trajectory written so far is still flushed before the error propagates.
RunResult run(const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace sweeplio
