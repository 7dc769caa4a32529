#include "sweeplio/trajectory.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>

#include "sweeplio/errors.hpp"

namespace sweeplio {

void write_tum(const std::string& path, const TrajectoryEstimate& traj) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open trajectory file: " + path);
  for (const TrajectoryEntry& e : traj) {
    const Quat& q = e.pose.rotation;
    std::fprintf(f, "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n", e.timestamp,
                 e.pose.translation.x(), e.pose.translation.y(),
                 e.pose.translation.z(), q.x(), q.y(), q.z(), q.w());
  }
  std::fclose(f);
}

TrajectoryEstimate read_tum(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw IoError("cannot open trajectory file: " + path);
  TrajectoryEstimate out;
  double v[8];
  long line = 0;
  while (true) {
    const int n = std::fscanf(f, "%lf %lf %lf %lf %lf %lf %lf %lf\n", &v[0],
                              &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7]);
    if (n == EOF) break;
    ++line;
    if (n != 8) {
      std::fclose(f);
      throw IoError("malformed TUM row at " + path + ":" +
                    std::to_string(line));
    }
    TrajectoryEntry e;
    e.timestamp = v[0];
    e.pose = Pose(Quat(v[7], v[4], v[5], v[6]), Vec3(v[1], v[2], v[3]));
    out.push_back(e);
  }
  std::fclose(f);
  return out;
}

AteResult eval_ate(const TrajectoryEstimate& estimate,
                   const TrajectoryEstimate& ground_truth, double max_dt) {
  // nearest-timestamp pairing over two sorted sequences
  std::vector<std::pair<Vec3, Vec3>> pairs;  // (est, gt)
  size_t j = 0;
  for (const TrajectoryEntry& e : estimate) {
    while (j + 1 < ground_truth.size() &&
           std::abs(ground_truth[j + 1].timestamp - e.timestamp) <=
               std::abs(ground_truth[j].timestamp - e.timestamp)) {
      ++j;
    }
    if (ground_truth.empty()) break;
    if (std::abs(ground_truth[j].timestamp - e.timestamp) <= max_dt) {
      pairs.emplace_back(e.pose.translation, ground_truth[j].pose.translation);
    }
  }
  if (pairs.size() < 3) {
    throw DataError("eval_ate: only " + std::to_string(pairs.size()) +
                    " matched timestamp pairs (need >= 3)");
  }

  // closed-form rigid alignment of the estimate onto the ground truth
  Vec3 mean_est = Vec3::Zero(), mean_gt = Vec3::Zero();
  for (const auto& [est, gt] : pairs) {
    mean_est += est;
    mean_gt += gt;
  }
  mean_est /= static_cast<double>(pairs.size());
  mean_gt /= static_cast<double>(pairs.size());

  Mat3 cross = Mat3::Zero();
  for (const auto& [est, gt] : pairs) {
    cross += (gt - mean_gt) * (est - mean_est).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(cross,
                             Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 flip = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    flip(2, 2) = -1.0;
  }
  const Mat3 rotation = svd.matrixU() * flip * svd.matrixV().transpose();
  const Vec3 translation = mean_gt - rotation * mean_est;

  AteResult result;
  result.matches = static_cast<int>(pairs.size());
  result.per_pose_error.reserve(pairs.size());
  double sum_sq = 0.0;
  for (const auto& [est, gt] : pairs) {
    const double err = (gt - (rotation * est + translation)).norm();
    result.per_pose_error.push_back(err);
    sum_sq += err * err;
  }
  result.rmse = std::sqrt(sum_sq / static_cast<double>(pairs.size()));
  return result;
}

AteResult eval_ate_files(const std::string& estimate_path,
                         const std::string& ground_truth_path, double max_dt) {
  return eval_ate(read_tum(estimate_path), read_tum(ground_truth_path),
                  max_dt);
}

}  // namespace sweeplio
