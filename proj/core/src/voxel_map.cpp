#include "sweeplio/voxel_map.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "sweeplio/errors.hpp"
#include "sweeplio/voxel_key.hpp"

namespace sweeplio {

std::optional<PlaneFit> fit_plane(std::span<const Vec3> points,
                                  int min_points, double min_planarity) {
  if (static_cast<int>(points.size()) < min_points) return std::nullopt;
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 c = p - centroid;
    scatter += c * c.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  const Vec3 lambda = eig.eigenvalues();  // ascending
  if (lambda(1) <= 1e-12 * std::max(lambda(2), 1.0)) {
    return std::nullopt;  // collinear
  }
  const double planarity = 1.0 - lambda(0) / lambda(1);
  if (planarity < min_planarity) return std::nullopt;  // isotropic blob

  PlaneFit fit;
  fit.normal = eig.eigenvectors().col(0).normalized();
  fit.d = -fit.normal.dot(centroid);
  fit.inlier_count = static_cast<int>(points.size());
  fit.planarity = planarity;
  return fit;
}

size_t VoxelMap::insert_sweep(std::span<const Vec3> world_points, double now,
                              double min_gap) {
  if (now - last_update_time_ + 1e-9 < min_gap) return 0;
  const size_t inserted = insert_points(world_points);
  last_update_time_ = now;
  return inserted;
}

size_t VoxelMap::insert_points(std::span<const Vec3> world_points) {
  size_t inserted = 0;
  const double spacing2 =
      params_.min_point_spacing * params_.min_point_spacing;
  for (const Vec3& p : world_points) {
    std::vector<Vec3>& cell = cells_[voxel_key(p, params_.voxel_size)];
    if (static_cast<int>(cell.size()) >= params_.max_points) continue;
    if (spacing2 > 0.0) {
      bool too_close = false;
      for (const Vec3& q : cell) {
        if ((p - q).squaredNorm() < spacing2) {
          too_close = true;
          break;
        }
      }
      if (too_close) continue;
    }
    cell.push_back(p);
    ++inserted;
  }
  return inserted;
}

std::vector<Vec3> VoxelMap::nearest_neighbors(const Vec3& query, int k) const {
  struct Candidate {
    double dist2;
    size_t order;
    const Vec3* p;
  };
  std::vector<Candidate> candidates;
  const int64_t cx = voxel_coord(query.x(), params_.voxel_size);
  const int64_t cy = voxel_coord(query.y(), params_.voxel_size);
  const int64_t cz = voxel_coord(query.z(), params_.voxel_size);
  size_t order = 0;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        auto it = cells_.find(pack_voxel(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) continue;
        for (const Vec3& p : it->second) {
          candidates.push_back({(p - query).squaredNorm(), order++, &p});
        }
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
              return a.order < b.order;
            });
  std::vector<Vec3> out;
  out.reserve(std::min<size_t>(candidates.size(), k));
  for (const Candidate& c : candidates) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(*c.p);
  }
  return out;
}

size_t VoxelMap::prune_far(const Vec3& center, double radius) {
  size_t removed = 0;
  const double r2 = radius * radius;
  for (auto it = cells_.begin(); it != cells_.end();) {
    int64_t ix, iy, iz;
    unpack_voxel(it->first, ix, iy, iz);
    const Vec3 cell_center((ix + 0.5) * params_.voxel_size,
                           (iy + 0.5) * params_.voxel_size,
                           (iz + 0.5) * params_.voxel_size);
    if ((cell_center - center).squaredNorm() > r2) {
      removed += it->second.size();
      it = cells_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

size_t VoxelMap::point_count() const {
  size_t n = 0;
  for (const auto& [key, cell] : cells_) n += cell.size();
  return n;
}

std::vector<Vec3> VoxelMap::all_points_sorted() const {
  std::vector<uint64_t> keys;
  keys.reserve(cells_.size());
  for (const auto& [key, cell] : cells_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  std::vector<Vec3> out;
  out.reserve(point_count());
  for (uint64_t key : keys) {
    const auto& cell = cells_.at(key);
    out.insert(out.end(), cell.begin(), cell.end());
  }
  return out;
}

void VoxelMap::export_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open map export file: " + path);
  std::fputs("x,y,z\n", f);
  for (const Vec3& p : all_points_sorted()) {
    std::fprintf(f, "%.9g,%.9g,%.9g\n", p.x(), p.y(), p.z());
  }
  std::fclose(f);
}

namespace {
constexpr char kMapMagic[8] = {'S', 'W', 'L', 'M', 'A', 'P', '0', '0'};
constexpr uint32_t kMapVersion = 1;
}  // namespace

void VoxelMap::export_binary(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open map dump file: " + path);
  f.write(kMapMagic, sizeof(kMapMagic));
  const uint32_t version = kMapVersion;
  f.write(reinterpret_cast<const char*>(&version), sizeof(version));
  f.write(reinterpret_cast<const char*>(&params_.voxel_size), sizeof(double));
  const uint32_t cap = static_cast<uint32_t>(params_.max_points);
  f.write(reinterpret_cast<const char*>(&cap), sizeof(cap));
  const std::vector<Vec3> pts = all_points_sorted();
  const uint64_t n = pts.size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const Vec3& p : pts) {
    const double xyz[3] = {p.x(), p.y(), p.z()};
    f.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
  if (!f) throw IoError("failed writing map dump: " + path);
}

VoxelMap VoxelMap::import_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open map dump file: " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMapMagic, sizeof(magic)) != 0) {
    throw IoError("not a map dump file: " + path);
  }
  uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kMapVersion) {
    throw IoError("unsupported map dump version in " + path);
  }
  Params params;
  f.read(reinterpret_cast<char*>(&params.voxel_size), sizeof(double));
  uint32_t cap = 0;
  f.read(reinterpret_cast<char*>(&cap), sizeof(cap));
  params.max_points = static_cast<int>(cap);
  uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  VoxelMap map(params);
  for (uint64_t i = 0; i < n; ++i) {
    double xyz[3];
    f.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
    if (!f) throw IoError("truncated map dump: " + path);
    const Vec3 p(xyz[0], xyz[1], xyz[2]);
    map.insert_points(std::span<const Vec3>(&p, 1));
  }
  return map;
}

}  // namespace sweeplio
