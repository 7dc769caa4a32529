#pragma once

#include <array>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "sweeplio/geometry.hpp"

namespace sweeplio {

struct TimedPoint {
  Vec3 position = Vec3::Zero();  // sensor frame at the capture instant
  double timestamp = 0.0;
};

// One full revolution worth of points, time-sorted.
struct RawSweep {
  std::vector<TimedPoint> points;
  double t_begin = 0.0;
  double t_end = 0.0;
};

struct SweepSegment {
  std::vector<TimedPoint> points;
  double t_begin = 0.0;
  double t_end = 0.0;
  int segment_index = 0;  // 1..3 within the parent sweep, 0 for stream cuts
};

// Three consecutive one-third segments joined into a full-duration sweep.
// Consecutive reconstructed sweeps share their trailing two segments.
struct ReconstructedSweep {
  std::array<SweepSegment, 3> segments;
  double t_begin = 0.0;
  double t_end = 0.0;
  long sequence_index = 0;

  // Boundary timestamps t0..t3 of the three segments.
  std::array<double, 4> boundaries() const {
    return {segments[0].t_begin, segments[1].t_begin, segments[2].t_begin,
            segments[2].t_end};
  }
  size_t point_count() const {
    return segments[0].points.size() + segments[1].points.size() +
           segments[2].points.size();
  }
};

// One row of the packet-mode sweep boundary index.
struct SweepBoundary {
  long sweep_id = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
};

inline constexpr double kDefaultSegmentGapTol = 5e-3;  // seconds

// Keeps at most one point per voxel cell; the earliest-timestamp point in
// each cell survives. Output preserves input (time) order.
std::vector<TimedPoint> downsample(std::span<const TimedPoint> points,
                                   double voxel_size);

// Splits a sweep at the thirds of its time interval. Half-open assignment
// [t_k, t_{k+1}); the final segment is closed on the right.
// Throws DegenerateError for sweeps with fewer than 3 points.
std::array<SweepSegment, 3> segment_sweep(const RawSweep& sweep);

// Joins three time-contiguous segments. Throws DataError when the gap
// between consecutive segments exceeds gap_tol.
ReconstructedSweep reconstruct(const SweepSegment& s0, const SweepSegment& s1,
                               const SweepSegment& s2, long sequence_index,
                               double gap_tol = kDefaultSegmentGapTol);

// Packet-mode processing: down-sample an incoming full sweep, segment it,
// and emit one reconstructed sweep per new segment joined with the two
// segments preceding it. The first sweep emits one output, later sweeps
// three. On an inter-sweep gap the carry is dropped and DataError is thrown;
// the next call starts cold.
class PacketReconstructor {
 public:
  PacketReconstructor(double voxel_size, double gap_tol = kDefaultSegmentGapTol)
      : voxel_size_(voxel_size), gap_tol_(gap_tol) {}

  std::vector<ReconstructedSweep> process(const RawSweep& sweep);
  void reset() { carry_.clear(); }

 private:
  double voxel_size_;
  double gap_tol_;
  std::deque<SweepSegment> carry_;  // last two segments
  long next_index_ = 0;
};

// Stream-mode processing: cut fixed-period segments from a point stream,
// down-sample each segment independently, and join with the previous two.
// Boundaries lie on the grid epoch + k * segment_period, where the epoch is
// the first point's timestamp. A forward gap larger than gap_tol drops the
// carry, re-anchors at the next grid boundary and throws DataError once;
// pushing more points resumes normally.
class StreamReconstructor {
 public:
  StreamReconstructor(double segment_period, double voxel_size,
                      double gap_tol = kDefaultSegmentGapTol)
      : period_(segment_period), voxel_size_(voxel_size), gap_tol_(gap_tol) {}

  void push(const TimedPoint& p);
  std::optional<ReconstructedSweep> poll();

 private:
  void close_segment();

  double period_;
  double voxel_size_;
  double gap_tol_;
  bool started_ = false;
  double epoch_ = 0.0;
  long cut_index_ = 0;  // current segment covers [epoch + k*T, epoch + (k+1)*T)
  double last_t_ = 0.0;
  std::vector<TimedPoint> current_;
  std::deque<SweepSegment> carry_;
  std::deque<ReconstructedSweep> ready_;
  long next_index_ = 0;
};

}  // namespace sweeplio
