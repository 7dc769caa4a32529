#include "sweeplio/sweep.hpp"

#include <cmath>
#include <unordered_set>

#include "sweeplio/voxel_key.hpp"

namespace sweeplio {

std::vector<TimedPoint> downsample(std::span<const TimedPoint> points,
                                   double voxel_size) {
  std::vector<TimedPoint> out;
  if (points.empty()) return out;
  std::unordered_set<uint64_t> occupied;
  occupied.reserve(points.size());
  out.reserve(points.size() / 4 + 1);
  // input is time-sorted, so first-wins keeps the earliest point per cell
  for (const TimedPoint& p : points) {
    if (occupied.insert(voxel_key(p.position, voxel_size)).second) {
      out.push_back(p);
    }
  }
  return out;
}

std::array<SweepSegment, 3> segment_sweep(const RawSweep& sweep) {
  const double duration = sweep.t_end - sweep.t_begin;
  if (sweep.points.size() < 3 || !(duration > 0.0)) {
    throw DegenerateError("segment_sweep: degenerate sweep (needs >= 3 points "
                          "and positive duration)");
  }
  std::array<SweepSegment, 3> segs;
  for (int k = 0; k < 3; ++k) {
    segs[k].t_begin = sweep.t_begin + duration * k / 3.0;
    segs[k].t_end = sweep.t_begin + duration * (k + 1) / 3.0;
    segs[k].segment_index = k + 1;
  }
  segs[2].t_end = sweep.t_end;
  for (const TimedPoint& p : sweep.points) {
    int k;
    if (p.timestamp < segs[0].t_end) {
      k = 0;
    } else if (p.timestamp < segs[1].t_end) {
      k = 1;
    } else {
      k = 2;  // final segment closed on the right
    }
    segs[k].points.push_back(p);
  }
  return segs;
}

ReconstructedSweep reconstruct(const SweepSegment& s0, const SweepSegment& s1,
                               const SweepSegment& s2, long sequence_index,
                               double gap_tol) {
  if (std::abs(s1.t_begin - s0.t_end) > gap_tol ||
      std::abs(s2.t_begin - s1.t_end) > gap_tol) {
    throw DataError("reconstruct: dropped data, segments are not contiguous");
  }
  ReconstructedSweep out;
  out.segments = {s0, s1, s2};
  out.t_begin = s0.t_begin;
  out.t_end = s2.t_end;
  out.sequence_index = sequence_index;
  return out;
}

std::vector<ReconstructedSweep> PacketReconstructor::process(
    const RawSweep& sweep) {
  const std::vector<TimedPoint> ds = downsample(sweep.points, voxel_size_);
  const RawSweep down{ds, sweep.t_begin, sweep.t_end};
  std::array<SweepSegment, 3> segs = segment_sweep(down);

  if (!carry_.empty() &&
      std::abs(sweep.t_begin - carry_.back().t_end) > gap_tol_) {
    // resync: this sweep becomes the new cold start
    carry_.clear();
    carry_.push_back(segs[1]);
    carry_.push_back(segs[2]);
    throw DataError("process_packet_mode: dropped data before sweep at t=" +
                    std::to_string(sweep.t_begin));
  }

  std::vector<ReconstructedSweep> out;
  for (SweepSegment& seg : segs) {
    if (carry_.size() == 2) {
      out.push_back(
          reconstruct(carry_[0], carry_[1], seg, next_index_++, gap_tol_));
    }
    carry_.push_back(std::move(seg));
    while (carry_.size() > 2) carry_.pop_front();
  }
  return out;
}

void StreamReconstructor::push(const TimedPoint& p) {
  if (!started_) {
    started_ = true;
    epoch_ = p.timestamp;
    cut_index_ = 0;
    last_t_ = p.timestamp;
    current_.clear();
  }
  if (p.timestamp < last_t_ - 1e-9) {
    throw DataError("process_stream_mode: out-of-order timestamp " +
                    std::to_string(p.timestamp));
  }
  const double gap = p.timestamp - last_t_;
  last_t_ = p.timestamp;

  const double seg_begin = epoch_ + period_ * cut_index_;
  if (p.timestamp < seg_begin) return;  // dropped while resynchronizing

  if (gap > gap_tol_) {
    // drop the partial segment and everything carried; resume on the next
    // grid boundary at or after the new point
    current_.clear();
    carry_.clear();
    cut_index_ = static_cast<long>(
        std::ceil((p.timestamp - epoch_) / period_ - 1e-9));
    throw DataError("process_stream_mode: dropped data, gap of " +
                    std::to_string(gap) + " s in point stream");
  }

  while (p.timestamp >= epoch_ + period_ * (cut_index_ + 1)) {
    close_segment();
  }
  current_.push_back(p);
}

void StreamReconstructor::close_segment() {
  SweepSegment seg;
  seg.t_begin = epoch_ + period_ * cut_index_;
  seg.t_end = epoch_ + period_ * (cut_index_ + 1);
  seg.points = downsample(current_, voxel_size_);
  current_.clear();
  ++cut_index_;

  if (carry_.size() == 2) {
    ready_.push_back(
        reconstruct(carry_[0], carry_[1], seg, next_index_++, gap_tol_));
  }
  carry_.push_back(std::move(seg));
  while (carry_.size() > 2) carry_.pop_front();
}

std::optional<ReconstructedSweep> StreamReconstructor::poll() {
  if (ready_.empty()) return std::nullopt;
  ReconstructedSweep out = std::move(ready_.front());
  ready_.pop_front();
  return out;
}

}  // namespace sweeplio
