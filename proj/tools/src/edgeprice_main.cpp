#include <iostream>

#include <CLI11.hpp>

#include "edgeprice/cli/commands.hpp"

#ifndef EDGEPRICE_VERSION
#define EDGEPRICE_VERSION "0.0.0"
#endif

int main(int argc, char** argv) {
  using namespace edgeprice::cli;

  CLI::App app{"Posted-price bandit simulator for edge resource markets"};
  app.set_version_flag("--version", EDGEPRICE_VERSION);
  app.require_subcommand(1);

  RunRequest run;
  std::string checkpoints;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write result files");
  run_cmd->add_option("--config", run.config_path, "Experiment config (TOML, or a JSON manifest)")
      ->required();
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", run.seed, "Override the master seed");
  run_cmd->add_option("--parallelism", run.parallelism, "Worker threads")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--checkpoints", checkpoints,
                      "geometric, linear:N, or a comma-separated list of rounds");

  std::filesystem::path validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Resolve a config and print its arms");
  validate_cmd->add_option("--config", validate_path, "Experiment config")->required();

  BenchTimingRequest bench;
  bench.k_list = {50, 100, 200, 300, 400, 500};
  auto* bench_cmd = app.add_subcommand("bench-timing", "Time each policy against K");
  bench_cmd->add_option("--k-list", bench.k_list, "Arm counts")->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "Episodes per (policy, K)");
  bench_cmd->add_option("--horizon", bench.horizon, "Rounds per episode");
  bench_cmd->add_option("--seed", bench.seed, "Master seed");
  bench_cmd->add_option("--out", bench.out_path, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  const Verbosity verbosity = verbosity_from_env();
  try {
    if (*run_cmd) {
      if (run_cmd->count("--checkpoints")) run.checkpoints = checkpoints;
      run.verbosity = verbosity;
      return cmd_run(run, std::cout, std::cerr);
    }
    if (*validate_cmd) return cmd_validate(validate_path, std::cout, std::cerr);
    if (*bench_cmd) {
      bench.verbosity = verbosity;
      return cmd_bench_timing(bench, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
