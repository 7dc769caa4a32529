#pragma once

#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "sweeplio/imu.hpp"
#include "sweeplio/sweep.hpp"

namespace sweeplio {

// Point CSV: header "t,x,y,z", t in seconds, sorted nondecreasing.
// IMU CSV: header "t,ax,ay,az,gx,gy,gz", SI units, sorted by t.
// Sweep index CSV: header "sweep_id,t_begin,t_end".

std::vector<ImuSample> read_imu_csv(const std::string& path);
void write_imu_csv(const std::string& path, std::span<const ImuSample> rows);

std::vector<SweepBoundary> read_sweeps_csv(const std::string& path);
void write_sweeps_csv(const std::string& path,
                      std::span<const SweepBoundary> rows);

std::vector<TimedPoint> read_points_csv(const std::string& path);
void write_points_csv(const std::string& path,
                      std::span<const TimedPoint> rows);

// Streaming access so the pipeline memory stays bounded by one sweep.
class PointsCsvReader {
 public:
  explicit PointsCsvReader(const std::string& path);
  ~PointsCsvReader();
  PointsCsvReader(const PointsCsvReader&) = delete;
  PointsCsvReader& operator=(const PointsCsvReader&) = delete;

  bool next(TimedPoint& out);

 private:
  std::FILE* file_ = nullptr;
  std::string path_;
  long line_ = 1;
};

class PointsCsvWriter {
 public:
  explicit PointsCsvWriter(const std::string& path);
  ~PointsCsvWriter();
  PointsCsvWriter(const PointsCsvWriter&) = delete;
  PointsCsvWriter& operator=(const PointsCsvWriter&) = delete;

  void write(const TimedPoint& p);

 private:
  std::FILE* file_ = nullptr;
};

}  // namespace sweeplio
