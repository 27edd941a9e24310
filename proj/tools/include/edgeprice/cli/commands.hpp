#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "edgeprice/policies.hpp"

namespace edgeprice::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitOutput = 3;

enum class Verbosity { quiet, normal, verbose };

// Reads EDGEPRICE_VERBOSITY (quiet|normal|verbose or 0|1|2); normal if unset.
Verbosity verbosity_from_env();

struct RunRequest {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  int parallelism = 1;
  std::optional<std::string> checkpoints;
  Verbosity verbosity = Verbosity::normal;
};

// Writes manifest.json, metrics.csv, arms.csv, histogram.csv and timing.csv.
int cmd_run(const RunRequest& request, std::ostream& out, std::ostream& err);

// Resolves the config and prints the arm set with its mean table.
int cmd_validate(const std::filesystem::path& config_path, std::ostream& out,
                 std::ostream& err);

struct BenchTimingRequest {
  std::vector<int> k_list;
  int trials = 5;
  std::int64_t horizon = 10000;
  std::uint64_t seed = 0;
  // Empty writes the CSV to stdout.
  std::filesystem::path out_path;
  Verbosity verbosity = Verbosity::normal;
};

struct TimingRow {
  std::string policy;
  int num_arms = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
};

// Arm k of K pays Bernoulli(0.1 + 0.8 k / (K - 1)).
std::vector<double> timing_instance_means(int num_arms);

// Times select_arm + update for each default policy, per K, over `trials`
// single episodes. Rows are ordered by K, then policy.
std::vector<TimingRow> bench_timing(const BenchTimingRequest& request);

int cmd_bench_timing(const BenchTimingRequest& request, std::ostream& out,
                     std::ostream& err);

}  // namespace edgeprice::cli
