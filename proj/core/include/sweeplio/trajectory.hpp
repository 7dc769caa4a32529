#pragma once

#include <string>
#include <vector>

#include "sweeplio/geometry.hpp"

namespace sweeplio {

struct TrajectoryEntry {
  double timestamp = 0.0;
  Pose pose;
};

using TrajectoryEstimate = std::vector<TrajectoryEntry>;

// TUM format: "t tx ty tz qx qy qz qw" per line, 9 significant digits.
void write_tum(const std::string& path, const TrajectoryEstimate& traj);
TrajectoryEstimate read_tum(const std::string& path);

struct AteResult {
  double rmse = 0.0;
  std::vector<double> per_pose_error;
  int matches = 0;
};

// Nearest-timestamp matching (within max_dt), closed-form rigid SE(3)
// alignment of the estimate onto the ground truth, then translational RMSE.
// Throws DataError with the match count when fewer than 3 pairs match.
AteResult eval_ate(const TrajectoryEstimate& estimate,
                   const TrajectoryEstimate& ground_truth,
                   double max_dt = 0.01);
AteResult eval_ate_files(const std::string& estimate_path,
                         const std::string& ground_truth_path,
                         double max_dt = 0.01);

}  // namespace sweeplio
