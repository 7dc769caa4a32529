#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sweeplio/sweep.hpp"
#include "test_support.hpp"

using namespace sweeplio;

namespace {

// evenly spaced points with distinct positions, one every dt seconds
std::vector<TimedPoint> uniform_stream(double t0, double t1, double dt) {
  std::vector<TimedPoint> out;
  long i = 0;
  for (double t = t0; t <= t1 + 1e-12; t = t0 + (++i) * dt) {
    TimedPoint p;
    p.timestamp = t;
    p.position = Vec3(std::fmod(i * 0.731, 50.0), std::fmod(i * 1.37, 40.0),
                      std::fmod(i * 0.211, 30.0));
    out.push_back(p);
  }
  return out;
}

RawSweep make_sweep(double t0, double duration, double dt) {
  RawSweep s;
  s.t_begin = t0;
  s.t_end = t0 + duration;
  s.points = uniform_stream(t0, t0 + duration - dt / 2, dt);
  return s;
}

}  // namespace

TEST_CASE("downsample keeps one point per cell, the earliest") {
  std::vector<TimedPoint> pts(2);
  pts[0].position = Vec3(0.1, 0.1, 0.1);
  pts[0].timestamp = 1.0;
  pts[1].position = Vec3(0.3, 0.4, 0.2);  // same 0.5 m cell
  pts[1].timestamp = 2.0;
  const auto out = downsample(pts, 0.5);
  REQUIRE(out.size() == 1);
  CHECK(out[0].timestamp == 1.0);
}

TEST_CASE("downsample retains points on a 1 m grid with 0.5 m voxels") {
  std::vector<TimedPoint> pts;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      TimedPoint p;
      p.position = Vec3(i, j, 0.0);
      p.timestamp = i * 4 + j;
      pts.push_back(p);
    }
  }
  CHECK(downsample(pts, 0.5).size() == pts.size());
}

TEST_CASE("downsample survivor count equals the occupied-cell oracle") {
  std::mt19937 rng(77);
  const auto pts = test::random_points(rng, 10000, 10.0, 0.0, 1.0);
  const auto out = downsample(pts, 0.5);
  // independent cell-occupancy count
  std::set<std::tuple<long, long, long>> cells;
  for (const TimedPoint& p : pts) {
    cells.insert({static_cast<long>(std::floor(p.position.x() / 0.5)),
                  static_cast<long>(std::floor(p.position.y() / 0.5)),
                  static_cast<long>(std::floor(p.position.z() / 0.5))});
  }
  CHECK(out.size() == cells.size());
  // every survivor is a member of the input
  std::set<double> input_stamps;
  for (const TimedPoint& p : pts) input_stamps.insert(p.timestamp);
  for (const TimedPoint& p : out) {
    CHECK(input_stamps.count(p.timestamp) == 1);
  }
}

TEST_CASE("downsample is idempotent") {
  std::mt19937 rng(78);
  const auto pts = test::random_points(rng, 3000, 8.0, 0.0, 1.0);
  const auto once = downsample(pts, 0.5);
  const auto twice = downsample(once, 0.5);
  REQUIRE(once.size() == twice.size());
  for (size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].position == twice[i].position);
  }
}

TEST_CASE("downsample of empty input is empty") {
  CHECK(downsample(std::vector<TimedPoint>{}, 0.5).empty());
}

TEST_CASE("segment boundaries at the thirds") {
  const RawSweep sweep = make_sweep(0.0, 0.1, 0.001);
  const auto segs = segment_sweep(sweep);
  CHECK(segs[0].t_end == doctest::Approx(0.1 / 3.0).epsilon(1e-12));
  CHECK(segs[1].t_end == doctest::Approx(0.2 / 3.0).epsilon(1e-12));
  CHECK(segs[2].t_end == 0.1);
  CHECK(segs[0].segment_index == 1);
  CHECK(segs[2].segment_index == 3);
}

TEST_CASE("7 Hz sweeps split into ~47.6 ms segments") {
  const double duration = 1.0 / 7.0;
  const RawSweep sweep = make_sweep(2.0, duration, 0.002);
  const auto segs = segment_sweep(sweep);
  for (const auto& s : segs) {
    CHECK(s.t_end - s.t_begin ==
          doctest::Approx(duration / 3.0).epsilon(1e-9));
  }
}

TEST_CASE("segmentation is an order-preserving partition") {
  std::mt19937 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> ud(0.05, 0.2);
    RawSweep sweep = make_sweep(trial * 1.0, ud(rng), 0.0013);
    const auto segs = segment_sweep(sweep);
    std::vector<TimedPoint> joined;
    for (const auto& s : segs) {
      for (const TimedPoint& p : s.points) {
        CHECK(p.timestamp >= s.t_begin);
        joined.push_back(p);
      }
    }
    REQUIRE(joined.size() == sweep.points.size());
    for (size_t i = 0; i < joined.size(); ++i) {
      CHECK(joined[i].timestamp == sweep.points[i].timestamp);
      CHECK(joined[i].position == sweep.points[i].position);
    }
  }
}

TEST_CASE("degenerate sweeps are rejected") {
  RawSweep tiny;
  tiny.t_begin = 0.0;
  tiny.t_end = 0.1;
  tiny.points.resize(2);
  CHECK_THROWS_AS(segment_sweep(tiny), DegenerateError);
}

TEST_CASE("reconstruct rejects gapped segments") {
  const RawSweep a = make_sweep(0.0, 0.1, 0.001);
  const RawSweep b = make_sweep(0.12, 0.1, 0.001);  // 20 ms gap
  const auto sa = segment_sweep(a);
  const auto sb = segment_sweep(b);
  CHECK_THROWS_AS(reconstruct(sa[1], sa[2], sb[0], 0), DataError);
  CHECK_NOTHROW(reconstruct(sa[0], sa[1], sa[2], 0));
}

TEST_CASE("packet mode: cold start emits 1, later sweeps emit 3, 3N-2 "
          "total") {
  PacketReconstructor rec(0.5);
  const auto first = rec.process(make_sweep(0.0, 0.1, 0.0005));
  CHECK(first.size() == 1);
  const auto second = rec.process(make_sweep(0.1, 0.1, 0.0005));
  CHECK(second.size() == 3);

  long total = static_cast<long>(first.size() + second.size());
  const int n_sweeps = 10;
  for (int i = 2; i < n_sweeps; ++i) {
    total += static_cast<long>(
        rec.process(make_sweep(0.1 * i, 0.1, 0.0005)).size());
  }
  CHECK(total == 3 * n_sweeps - 2);
}

TEST_CASE("packet-mode outputs follow the boundary set of the thirds") {
  PacketReconstructor rec(0.5);
  std::vector<ReconstructedSweep> out;
  for (int i = 0; i < 4; ++i) {
    for (auto& r : rec.process(make_sweep(0.1 * i, 0.1, 0.0005))) {
      out.push_back(r);
    }
  }
  const double third = 0.1 / 3.0;
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].t_begin == doctest::Approx(i * third).epsilon(1e-9));
    CHECK(out[i].t_end - out[i].t_begin ==
          doctest::Approx(0.1).epsilon(1e-9));
    CHECK(out[i].sequence_index == static_cast<long>(i));
  }
  // the begin of output i is the end of output i-3
  for (size_t i = 3; i < out.size(); ++i) {
    CHECK(out[i].t_begin ==
          doctest::Approx(out[i - 3].t_end).epsilon(1e-12));
  }
}

TEST_CASE("consecutive reconstructed sweeps share exactly two segments") {
  PacketReconstructor rec(0.5);
  std::vector<ReconstructedSweep> out;
  for (int i = 0; i < 3; ++i) {
    for (auto& r : rec.process(make_sweep(0.1 * i, 0.1, 0.0005))) {
      out.push_back(r);
    }
  }
  REQUIRE(out.size() >= 2);
  for (size_t i = 1; i < out.size(); ++i) {
    int shared = 0;
    for (const auto& a : out[i - 1].segments) {
      for (const auto& b : out[i].segments) {
        if (a.t_begin == b.t_begin && a.t_end == b.t_end) ++shared;
      }
    }
    CHECK(shared == 2);
  }
}

TEST_CASE("multiplexing identity: interior segments appear in exactly three "
          "outputs") {
  PacketReconstructor rec(0.5);
  std::vector<ReconstructedSweep> out;
  for (int i = 0; i < 5; ++i) {
    for (auto& r : rec.process(make_sweep(0.1 * i, 0.1, 0.0005))) {
      out.push_back(r);
    }
  }
  std::map<long, int> count;  // keyed by segment index on the thirds grid
  const double third = 0.1 / 3.0;
  for (const auto& r : out) {
    for (const auto& s : r.segments) count[std::lround(s.t_begin / third)]++;
  }
  const long last = count.rbegin()->first;
  for (const auto& [index, c] : count) {
    if (index >= 2 && index <= last - 2) {
      CHECK(c == 3);  // interior
    } else {
      CHECK(c <= 3);  // boundary segments appear fewer times
    }
  }
}

TEST_CASE("no duplication inside one output; across outputs the overlap is "
          "exactly the shared segments") {
  PacketReconstructor rec(0.5);
  std::vector<ReconstructedSweep> out;
  for (int i = 0; i < 3; ++i) {
    for (auto& r : rec.process(make_sweep(0.1 * i, 0.1, 0.0005))) {
      out.push_back(r);
    }
  }
  using Key = std::tuple<double, double, double, double>;
  auto key = [](const TimedPoint& p) {
    return Key{p.timestamp, p.position.x(), p.position.y(), p.position.z()};
  };
  for (const auto& r : out) {
    std::set<Key> seen;
    for (const auto& s : r.segments) {
      for (const TimedPoint& p : s.points) {
        CHECK(seen.insert(key(p)).second);
      }
    }
  }
  std::set<Key> a, b, shared_expected;
  for (const auto& s : out[0].segments) {
    for (const TimedPoint& p : s.points) a.insert(key(p));
  }
  for (const auto& s : out[1].segments) {
    for (const TimedPoint& p : s.points) b.insert(key(p));
  }
  for (int k = 1; k < 3; ++k) {
    for (const TimedPoint& p : out[0].segments[k].points) {
      shared_expected.insert(key(p));
    }
  }
  std::set<Key> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(inter, inter.begin()));
  CHECK(inter == shared_expected);
}

TEST_CASE("packet mode resynchronizes after a dropped sweep") {
  PacketReconstructor rec(0.5);
  rec.process(make_sweep(0.0, 0.1, 0.0005));
  rec.process(make_sweep(0.1, 0.1, 0.0005));
  // 200 ms hole
  CHECK_THROWS_AS(rec.process(make_sweep(0.4, 0.1, 0.0005)), DataError);
  // the gapped sweep became the new cold start: the next one emits 3 again
  const auto resumed = rec.process(make_sweep(0.5, 0.1, 0.0005));
  CHECK(resumed.size() == 3);
}

TEST_CASE("stream mode cuts boundaries on the period grid") {
  StreamReconstructor rec(1.0 / 30.0, 0.5);
  const auto pts = uniform_stream(0.0, 0.5, 0.0005);
  std::vector<ReconstructedSweep> out;
  for (const TimedPoint& p : pts) {
    rec.push(p);
    while (auto r = rec.poll()) out.push_back(*r);
  }
  REQUIRE(out.size() >= 10);
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].t_begin == doctest::Approx(i / 30.0).epsilon(1e-9));
    CHECK(out[i].t_end == doctest::Approx(i / 30.0 + 0.1).epsilon(1e-9));
  }
}

TEST_CASE("stream mode surfaces gaps and resynchronizes on the grid") {
  StreamReconstructor rec(1.0 / 30.0, 0.5);
  for (const TimedPoint& p : uniform_stream(0.0, 0.2, 0.0005)) rec.push(p);
  TimedPoint after_gap;
  after_gap.timestamp = 0.4;  // 200 ms silence
  after_gap.position = Vec3(1, 2, 3);
  CHECK_THROWS_AS(rec.push(after_gap), DataError);
  std::vector<ReconstructedSweep> out;
  for (const TimedPoint& p : uniform_stream(0.41, 0.8, 0.0005)) {
    rec.push(p);
    while (auto r = rec.poll()) out.push_back(*r);
  }
  REQUIRE(!out.empty());
  // boundaries stay on the original epoch grid
  const double k = out.front().t_begin * 30.0;
  CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-6));
}

TEST_CASE("stream mode rejects out-of-order timestamps") {
  StreamReconstructor rec(1.0 / 30.0, 0.5);
  TimedPoint p;
  p.timestamp = 1.0;
  rec.push(p);
  p.timestamp = 0.9;
  CHECK_THROWS_AS(rec.push(p), DataError);
}

TEST_CASE("packet and stream modes agree on reconstructed boundaries") {
  const double period = 0.1 / 3.0;
  std::vector<RawSweep> sweeps;
  for (int i = 0; i < 6; ++i) {
    sweeps.push_back(make_sweep(0.1 * i, 0.1, 0.0005));
  }

  PacketReconstructor packet(0.5);
  std::vector<ReconstructedSweep> packet_out;
  for (const auto& s : sweeps) {
    for (auto& r : packet.process(s)) packet_out.push_back(r);
  }

  StreamReconstructor stream(period, 0.5);
  std::vector<ReconstructedSweep> stream_out;
  for (const auto& s : sweeps) {
    for (const TimedPoint& p : s.points) {
      stream.push(p);
      while (auto r = stream.poll()) stream_out.push_back(*r);
    }
  }
  REQUIRE(stream_out.size() + 1 >= packet_out.size());
  const double sample_period = 0.0005;
  const size_t n = std::min(packet_out.size(), stream_out.size());
  for (size_t i = 0; i < n; ++i) {
    CHECK(std::abs(packet_out[i].t_begin - stream_out[i].t_begin) <=
          sample_period + 1e-9);
    CHECK(std::abs(packet_out[i].t_end - stream_out[i].t_end) <=
          sample_period + 1e-9);
  }
}

TEST_CASE("reconstruction frequency: 10 Hz raw gives 30 Hz, 7 Hz gives "
          "about 21 Hz") {
  for (const double rate : {10.0, 7.0}) {
    PacketReconstructor rec(0.5);
    std::vector<double> ends;
    for (int i = 0; i < 14; ++i) {
      for (auto& r :
           rec.process(make_sweep(i / rate, 1.0 / rate, 0.0004))) {
        ends.push_back(r.t_end);
      }
    }
    REQUIRE(ends.size() >= 10);
    const double mean_interval =
        (ends.back() - ends.front()) / static_cast<double>(ends.size() - 1);
    CHECK(1.0 / mean_interval == doctest::Approx(3.0 * rate).epsilon(0.02));
  }
}
