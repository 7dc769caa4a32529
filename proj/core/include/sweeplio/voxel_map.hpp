#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sweeplio/geometry.hpp"

namespace sweeplio {

struct PlaneFit {
  Vec3 normal = Vec3::UnitZ();  // unit length; plane is n.x + d = 0
  double d = 0.0;
  int inlier_count = 0;
  double planarity = 0.0;  // 1 - lambda_min / lambda_mid
};

// Least-squares plane through >= min_points points: normal from the smallest
// eigenvector of the centered scatter matrix. Returns nullopt for degenerate
// neighborhoods (collinear points or isotropic blobs) so the caller can skip
// the residual.
std::optional<PlaneFit> fit_plane(std::span<const Vec3> points,
                                  int min_points = 5,
                                  double min_planarity = 0.1);

// Spatial hash of world-frame map points with a hard per-cell capacity and a
// minimum time gap between insertion events.
class VoxelMap {
 public:
  struct Params {
    double voxel_size = 1.0;
    int max_points = 20;
    double min_point_spacing = 0.0;  // 0 disables the spacing check
  };

  VoxelMap() = default;
  explicit VoxelMap(const Params& params) : params_(params) {}

  const Params& params() const { return params_; }

  // Frequency-gated insertion: a no-op returning 0 unless at least min_gap
  // seconds passed since the previous insertion event.
  size_t insert_sweep(std::span<const Vec3> world_points, double now,
                      double min_gap);

  // Ungated insertion honoring the per-cell capacity.
  size_t insert_points(std::span<const Vec3> world_points);

  // Up to k nearest stored points from the query's cell and its 26
  // neighbors, ascending distance.
  std::vector<Vec3> nearest_neighbors(const Vec3& query, int k) const;

  // Removes whole cells whose center is farther than radius from center.
  size_t prune_far(const Vec3& center, double radius);

  size_t point_count() const;
  size_t cell_count() const { return cells_.size(); }
  double last_update_time() const { return last_update_time_; }

  // Deterministic (key-sorted) flat export of the stored points.
  std::vector<Vec3> all_points_sorted() const;

  void export_csv(const std::string& path) const;
  void export_binary(const std::string& path) const;
  static VoxelMap import_binary(const std::string& path);

 private:
  Params params_;
  std::unordered_map<uint64_t, std::vector<Vec3>> cells_;
  double last_update_time_ = -std::numeric_limits<double>::infinity();
};

}  // namespace sweeplio
