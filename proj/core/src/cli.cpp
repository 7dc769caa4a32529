#include "sweeplio/cli.hpp"

#include <cstdio>
#include <filesystem>

#include <CLI11.hpp>

#include "sweeplio/config.hpp"
#include "sweeplio/errors.hpp"
#include "sweeplio/pipeline.hpp"
#include "sweeplio/simulator.hpp"
#include "sweeplio/trajectory.hpp"

namespace sweeplio {

namespace {

int do_run(const std::string& config_path, const std::string& out_dir) {
  const PipelineConfig cfg = load_config(config_path);
  const RunResult result = run(cfg, out_dir);
  std::printf("processed %ld raw inputs -> %ld reconstructed sweeps, "
              "%ld windows\n",
              result.raw_inputs, result.reconstructed_sweeps,
              result.windows_solved);
  std::printf("trajectory: %zu poses -> %s/trajectory.tum\n",
              result.trajectory.size(), out_dir.c_str());
  std::printf("map: %zu points -> %s/map.csv\n", result.map_points,
              out_dir.c_str());
  std::printf("timing per sweep (ms): SR %.2f | LIO-Opt %.2f | Map Update "
              "%.2f | Total %.2f\n",
              result.mean_per_sweep.sweep_reconstruction_ms,
              result.mean_per_sweep.lio_optimization_ms,
              result.mean_per_sweep.map_update_ms,
              result.mean_per_sweep.total_ms);
  return 0;
}

int do_simulate(const std::string& scenario, const std::string& out_dir) {
  const Scenario sc =
      is_preset(scenario) ? make_preset(scenario) : load_manifest(scenario);
  export_scenario(sc, out_dir);
  std::printf("scenario '%s' (%.1f s) -> %s/{points,imu,sweeps}.csv, gt.tum, "
              "manifest.json\n",
              sc.name.c_str(), sc.trajectory.duration(), out_dir.c_str());
  return 0;
}

int do_eval_ate(const std::string& est, const std::string& gt) {
  const AteResult result = eval_ate_files(est, gt);
  std::printf("ATE rmse: %.6f m over %d matched poses\n", result.rmse,
              result.matches);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Sweep-reconstructing LiDAR-inertial odometry"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario, est_path, gt_path;

  CLI::App* cmd_run =
      app.add_subcommand("run", "Run the odometry pipeline on CSV inputs");
  cmd_run->add_option("--config", config_path, "pipeline config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_run->add_option("--out", out_dir, "output directory")->required();
  cmd_run->footer(config_reference());

  CLI::App* cmd_sim = app.add_subcommand(
      "simulate", "Generate a synthetic scenario (preset name or manifest "
                  "path)");
  cmd_sim->add_option("--scenario", scenario,
                      "preset (static, corridor, corridor_noisy, circle, "
                      "figure_eight) or manifest.json path")
      ->required();
  cmd_sim->add_option("--out", out_dir, "output directory")->required();

  CLI::App* cmd_eval = app.add_subcommand(
      "eval-ate", "Absolute translational error of a trajectory");
  cmd_eval->add_option("--est", est_path, "estimated trajectory (TUM)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--gt", gt_path, "ground-truth trajectory (TUM)")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_run->parsed()) return do_run(config_path, out_dir);
    if (cmd_sim->parsed()) return do_simulate(scenario, out_dir);
    if (cmd_eval->parsed()) return do_eval_ate(est_path, gt_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: runtime: %s\n", e.what());
    return 1;
  }
  return 2;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("sweeplio");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace sweeplio
