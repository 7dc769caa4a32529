#include "sweeplio/pipeline.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "sweeplio/csv_io.hpp"
#include "sweeplio/init.hpp"
#include "sweeplio/optimizer.hpp"
#include "sweeplio/sweep.hpp"
#include "sweeplio/voxel_map.hpp"

namespace sweeplio {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

std::vector<Vec3> transform_sweep(const OptWindow& window,
                                  const ReconstructedSweep& sweep,
                                  const Extrinsics& extrinsics) {
  std::vector<Vec3> out;
  out.reserve(sweep.point_count());
  for (int k = 0; k < 3; ++k) {
    for (const TimedPoint& p : sweep.segments[k].points) {
      const State x_p =
          interpolate_state(window.state(k), window.state(k + 1), p.timestamp);
      out.push_back(x_p.pose() * (extrinsics.lidar_to_imu * p.position));
    }
  }
  return out;
}

// Streams raw sweeps out of the point CSV using the boundary index, keeping
// memory bounded by one sweep.
class PacketSource {
 public:
  PacketSource(const std::string& points_path,
               const std::string& sweeps_path)
      : reader_(points_path), boundaries_(read_sweeps_csv(sweeps_path)) {}

  std::optional<RawSweep> next() {
    while (index_ < boundaries_.size()) {
      const SweepBoundary b = boundaries_[index_++];
      RawSweep sweep;
      sweep.t_begin = b.t_begin;
      sweep.t_end = b.t_end;
      if (pending_) {
        if (pending_->timestamp > b.t_end) continue;  // empty sweep
        sweep.points.push_back(*pending_);
        pending_.reset();
      }
      TimedPoint p;
      while (reader_.next(p)) {
        if (p.timestamp > b.t_end) {
          pending_ = p;
          break;
        }
        if (p.timestamp >= b.t_begin) sweep.points.push_back(p);
      }
      if (!sweep.points.empty()) return sweep;
    }
    return std::nullopt;
  }

  size_t total_sweeps() const { return boundaries_.size(); }

 private:
  PointsCsvReader reader_;
  std::vector<SweepBoundary> boundaries_;
  size_t index_ = 0;
  std::optional<TimedPoint> pending_;
};

struct Report {
  RunResult result;
  double sum_point_residuals = 0.0;
};

void write_report(const Report& report, const std::string& path) {
  const RunResult& r = report.result;
  nlohmann::json j;
  j["raw_inputs"] = r.raw_inputs;
  j["reconstructed_sweeps"] = r.reconstructed_sweeps;
  j["windows_solved"] = r.windows_solved;
  j["dropped_data_events"] = r.dropped_data_events;
  j["trajectory_entries"] = r.trajectory.size();
  j["map_points"] = r.map_points;
  j["mean_point_residuals_per_window"] = r.mean_point_residuals;
  j["timing_ms_per_sweep"] = {
      {"SR", r.mean_per_sweep.sweep_reconstruction_ms},
      {"LIO-Opt", r.mean_per_sweep.lio_optimization_ms},
      {"Map Update", r.mean_per_sweep.map_update_ms},
      {"Total", r.mean_per_sweep.total_ms}};
  j["timing_ms_total"] = {{"SR", r.total.sweep_reconstruction_ms},
                          {"LIO-Opt", r.total.lio_optimization_ms},
                          {"Map Update", r.total.map_update_ms},
                          {"Total", r.total.total_ms}};
  std::ofstream f(path);
  if (!f) throw IoError("cannot write report: " + path);
  f << j.dump(2) << "\n";
}

// Everything the per-sweep loop needs to carry between sweeps.
class Odometry {
 public:
  Odometry(const PipelineConfig& cfg, std::vector<ImuSample> imu)
      : cfg_(cfg),
        imu_(std::move(imu)),
        map_(VoxelMap::Params{cfg.map_voxel, cfg.map_max_points,
                              cfg.min_point_spacing}) {}

  // returns the trajectory entries finalized so far
  TrajectoryEstimate& trajectory() { return trajectory_; }
  const VoxelMap& map() const { return map_; }
  long windows_solved() const { return windows_solved_; }
  double sum_point_residuals() const { return sum_point_residuals_; }

  void process(const ReconstructedSweep& sweep) {
    if (!initialized_) {
      pending_.push_back(sweep);
      if (cfg_.init_mode == "static") {
        initialize_static();
      } else if (pending_.size() >= 20) {
        initialize_motion();
      }
      return;
    }
    run_window(sweep);
  }

  // flush the not-yet-finalized tail states
  void finish() {
    if (window_valid_) {
      trajectory_.push_back(
          {window_.x_e2.timestamp, window_.x_e2.pose()});
      trajectory_.push_back(
          {window_.x_e3.timestamp, window_.x_e3.pose()});
    }
  }

 private:
  Preintegration preintegrate(double t0, double t1, const State& at) {
    return Preintegration::integrate(imu_, t0, t1, at.accel_bias,
                                     at.gyro_bias, cfg_.noise);
  }

  // state at time t for the stationary phase covered by static init
  State static_state_at(double t) const {
    State s = init_state_;
    if (t <= init_state_.timestamp) {
      s.timestamp = t;
      return s;
    }
    return propagate_state(init_state_, imu_, t, gravity_);
  }

  void initialize_static() {
    const InitResult init =
        static_init(imu_, cfg_.gravity_norm,
                    StaticInitOptions{cfg_.init_window, 0.05 * 0.05,
                                      0.01 * 0.01});
    gravity_ = init.gravity_w;
    init_state_ = init.initial_states.front();
    initialized_ = true;

    // the buffered first sweep seeds the map at the stationary pose
    const ReconstructedSweep& first = pending_.front();
    const auto b = first.boundaries();
    OptWindow seed;
    for (int k = 0; k < 4; ++k) seed.state(k) = static_state_at(b[k]);
    seed.anchor = seed.x_b;
    seed.gravity = gravity_;
    map_.insert_sweep(transform_sweep(seed, first, cfg_.extrinsics),
                      first.t_end, cfg_.map_min_gap);
    chain_ = {seed.x_e1, seed.x_e2, seed.x_e3};
    trajectory_.push_back({seed.x_b.timestamp, seed.x_b.pose()});
    trajectory_.push_back({seed.x_e1.timestamp, seed.x_e1.pose()});
    pending_.clear();
  }

  void initialize_motion() {
    BootstrapOptions options;
    options.solver = cfg_.solver;
    options.solver.min_points = std::min(cfg_.solver.min_points, 30);
    options.map_min_gap = cfg_.map_min_gap;
    const std::vector<Pose> poses = lidar_only_bootstrap(
        pending_, map_, cfg_.extrinsics, Vec3(0, 0, cfg_.gravity_norm),
        options);

    std::vector<Quat> rotations;
    std::vector<double> ends;
    for (size_t i = 0; i < poses.size(); ++i) {
      rotations.push_back(poses[i].rotation);
      ends.push_back(pending_[i].t_end);
    }
    std::vector<Preintegration> preints;
    for (size_t i = 0; i + 1 < ends.size(); ++i) {
      preints.push_back(Preintegration::integrate(
          imu_, ends[i], ends[i + 1], Vec3::Zero(), Vec3::Zero(),
          cfg_.noise));
    }
    const Vec3 gyro_bias = estimate_gyro_bias(rotations, preints);
    for (size_t i = 0; i + 1 < ends.size(); ++i) {
      preints[i] = Preintegration::integrate(imu_, ends[i], ends[i + 1],
                                             Vec3::Zero(), gyro_bias,
                                             cfg_.noise);
    }
    const InitResult init = init_velocity_gravity(poses, preints, gyro_bias,
                                                  cfg_.gravity_norm);
    gravity_ = init.gravity_w;

    const size_t n = init.initial_states.size();
    for (size_t i = 0; i + 2 < n; ++i) {
      trajectory_.push_back({init.initial_states[i].timestamp,
                             init.initial_states[i].pose()});
    }
    chain_ = {init.initial_states[n - 3], init.initial_states[n - 2],
              init.initial_states[n - 1]};
    initialized_ = true;
    pending_.clear();
  }

  void run_window(const ReconstructedSweep& sweep) {
    const auto b = sweep.boundaries();
    if (!window_valid_) {
      OptWindow w;
      w.gravity = gravity_;
      w.anchor = chain_[0];
      w.x_b = chain_[0];
      w.x_e1 = chain_[1];
      w.x_e2 = chain_[2];
      w.preints = {preintegrate(b[0], b[1], chain_[0]),
                   preintegrate(b[1], b[2], chain_[1]),
                   preintegrate(b[2], b[3], chain_[2])};
      w.x_e3 = propagate_state(chain_[2], imu_, b[3], gravity_);
      w.x_e3.accel_bias = chain_[2].accel_bias;
      w.x_e3.gyro_bias = chain_[2].gyro_bias;
      window_ = w;
      window_valid_ = true;
    } else {
      const Preintegration next =
          preintegrate(b[2], b[3], window_.x_e3);
      const auto [x_b_pred, x_e_pred] = predict_states(
          window_.x_e3, window_.x_e1, imu_, b[3], gravity_);
      (void)x_b_pred;  // shift_window applies the begin-state identity
      window_ = shift_window(window_, next, x_e_pred);
    }

    const SolveReport report =
        solve_window(window_, map_, sweep, cfg_.extrinsics, cfg_.solver);
    ++windows_solved_;
    sum_point_residuals_ += report.point_residuals;

    // x_e1 leaves the optimizable span with this solve
    trajectory_.push_back({window_.x_e1.timestamp, window_.x_e1.pose()});
  }

 public:
  void update_map(const ReconstructedSweep& sweep) {
    if (!window_valid_) return;
    const std::vector<Vec3> pts =
        transform_sweep(window_, sweep, cfg_.extrinsics);
    if (map_.insert_sweep(pts, sweep.t_end, cfg_.map_min_gap) > 0) {
      map_.prune_far(window_.x_e3.translation, cfg_.prune_radius);
    }
  }

  bool window_active() const { return window_valid_; }

 private:
  const PipelineConfig& cfg_;
  std::vector<ImuSample> imu_;
  VoxelMap map_;
  Vec3 gravity_ = Vec3(0, 0, 9.81);
  State init_state_;
  bool initialized_ = false;
  std::vector<ReconstructedSweep> pending_;
  std::array<State, 3> chain_;  // last three solved/initialized boundary states
  OptWindow window_;
  bool window_valid_ = false;
  TrajectoryEstimate trajectory_;
  long windows_solved_ = 0;
  double sum_point_residuals_ = 0.0;
};

}  // namespace

RunResult run(const PipelineConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);
  const fs::path dir(out_dir);

  std::vector<ImuSample> imu = read_imu_csv(cfg.imu_csv);
  if (imu.empty()) throw DataError("empty IMU stream: " + cfg.imu_csv);
  if (cfg.imu_upsample_hz > 0.0) {
    imu = upsample_linear(imu, cfg.imu_upsample_hz);
  }

  Report report;
  RunResult& result = report.result;
  Odometry odom(cfg, std::move(imu));

  const auto t_run0 = Clock::now();
  auto handle_sweep = [&](const ReconstructedSweep& sweep) {
    ++result.reconstructed_sweeps;
    const auto t0 = Clock::now();
    odom.process(sweep);
    result.total.lio_optimization_ms += ms_since(t0);
    const auto t1 = Clock::now();
    odom.update_map(sweep);
    result.total.map_update_ms += ms_since(t1);
  };

  auto flush_outputs = [&]() {
    odom.finish();
    result.trajectory = odom.trajectory();
    result.windows_solved = odom.windows_solved();
    result.map_points = odom.map().point_count();
    result.mean_point_residuals =
        result.windows_solved > 0
            ? odom.sum_point_residuals() / result.windows_solved
            : 0.0;
    result.total.total_ms = ms_since(t_run0);
    if (result.reconstructed_sweeps > 0) {
      const double n = static_cast<double>(result.reconstructed_sweeps);
      result.mean_per_sweep.sweep_reconstruction_ms =
          result.total.sweep_reconstruction_ms / n;
      result.mean_per_sweep.lio_optimization_ms =
          result.total.lio_optimization_ms / n;
      result.mean_per_sweep.map_update_ms = result.total.map_update_ms / n;
      result.mean_per_sweep.total_ms = result.total.total_ms / n;
    }
    write_tum((dir / "trajectory.tum").string(), result.trajectory);
    odom.map().export_csv((dir / "map.csv").string());
    write_report(report, (dir / "report.json").string());
  };

  try {
    if (!cfg.sweeps_csv.empty()) {
      // packet mode
      PacketSource source(cfg.points_csv, cfg.sweeps_csv);
      PacketReconstructor reconstructor(cfg.downsample_voxel,
                                        cfg.segment_gap_tol);
      while (true) {
        const auto t0 = Clock::now();
        std::optional<RawSweep> sweep = source.next();
        if (!sweep) break;
        ++result.raw_inputs;
        std::vector<ReconstructedSweep> ready;
        try {
          ready = reconstructor.process(*sweep);
        } catch (const Error&) {
          ++result.dropped_data_events;  // resynchronized internally
        }
        result.total.sweep_reconstruction_ms += ms_since(t0);
        for (const ReconstructedSweep& r : ready) handle_sweep(r);
      }
    } else {
      // stream mode
      PointsCsvReader reader(cfg.points_csv);
      StreamReconstructor reconstructor(cfg.segment_period,
                                        cfg.downsample_voxel,
                                        cfg.segment_gap_tol);
      TimedPoint p;
      bool more = true;
      while (more) {
        const auto t0 = Clock::now();
        std::optional<ReconstructedSweep> ready;
        while (!(ready = reconstructor.poll())) {
          if (!(more = reader.next(p))) break;
          ++result.raw_inputs;
          try {
            reconstructor.push(p);
          } catch (const Error&) {
            ++result.dropped_data_events;
          }
        }
        result.total.sweep_reconstruction_ms += ms_since(t0);
        if (ready) handle_sweep(*ready);
      }
      while (std::optional<ReconstructedSweep> ready = reconstructor.poll()) {
        handle_sweep(*ready);
      }
    }
  } catch (const Error&) {
    flush_outputs();  // partial trajectory up to the failure
    throw;
  }

  flush_outputs();
  return result;
}

}  // namespace sweeplio
