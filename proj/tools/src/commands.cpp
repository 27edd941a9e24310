#include "edgeprice/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "edgeprice/cli/config_io.hpp"
#include "edgeprice/cli/results_io.hpp"
#include "edgeprice/errors.hpp"
#include "edgeprice/runner.hpp"

#ifndef EDGEPRICE_VERSION
#define EDGEPRICE_VERSION "0.0.0"
#endif

namespace edgeprice::cli {

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

void print_summary(std::ostream& out, const ExperimentMetrics& m) {
  out << std::left << std::setw(18) << "policy" << std::right << std::setw(16)
      << "pseudo_regret" << std::setw(12) << "se" << std::setw(16) << "cum_reward"
      << std::setw(14) << "decision_s" << '\n';
  for (const auto& p : m.policies) {
    out << std::left << std::setw(18) << p.label << std::right << std::setw(16)
        << format_double(p.mean_pseudo_regret.back()) << std::setw(12)
        << format_double(p.se_pseudo_regret.back()) << std::setw(16)
        << format_double(p.mean_cum_reward.back()) << std::setw(14)
        << format_double(p.total_decision_seconds) << '\n';
  }
}

}  // namespace

Verbosity verbosity_from_env() {
  const char* v = std::getenv("EDGEPRICE_VERBOSITY");
  if (!v) return Verbosity::normal;
  const std::string s(v);
  if (s == "quiet" || s == "0") return Verbosity::quiet;
  if (s == "verbose" || s == "2") return Verbosity::verbose;
  return Verbosity::normal;
}

int cmd_run(const RunRequest& request, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::system_clock::now();
  ExperimentConfig config;
  try {
    config = load_config(request.config_path);
    if (request.seed) config.master_seed = *request.seed;
    if (request.checkpoints) {
      config.checkpoints = parse_checkpoint_spec(*request.checkpoints, config.horizon);
    }
    config.validate();
  } catch (const ConfigParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const ConfigError& e) {
    err << "error: " << request.config_path.string() << ": " << e.what() << '\n';
    return kExitBadConfig;
  }
  if (request.parallelism < 1) {
    err << "error: --parallelism must be at least 1\n";
    return kExitBadConfig;
  }

  const auto& dir = request.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    err << "error: " << dir.string() << ": output directory is not writable"
        << (ec ? " (" + ec.message() + ")" : std::string()) << '\n';
    return kExitOutput;
  }

  const Environment env(config.environment);
  RunOptions options;
  options.parallelism = request.parallelism;
  const auto policies = config.resolved_policies();
  if (request.verbosity == Verbosity::verbose) {
    options.progress = [&](std::size_t policy, int done) {
      if (done == config.episodes) {
        err << "finished " << policies[policy].label << " (" << done << " episodes)\n";
      }
    };
  }
  if (request.verbosity != Verbosity::quiet) {
    err << "running " << config.name << ": " << policies.size() << " policies, "
        << config.episodes << " episodes, horizon " << config.horizon << '\n';
  }
  const ExperimentMetrics metrics = run_experiment(config, env, options);
  const auto finished = std::chrono::system_clock::now();

  nlohmann::json manifest;
  manifest["tool"] = "edgeprice";
  manifest["version"] = EDGEPRICE_VERSION;
  manifest["seed"] = config.master_seed;
  manifest["started_at"] = utc_timestamp(started);
  manifest["finished_at"] = utc_timestamp(finished);
  manifest["parallelism"] = request.parallelism;
  manifest["config"] = config_to_json(config);
  manifest["arms"] = arms_to_json(env);
  manifest["best_arm"] = metrics.best_arm;
  nlohmann::json early = nlohmann::json::array();
  for (const auto& p : metrics.policies) {
    early.push_back({{"policy", p.label},
                     {"rounds_played", p.rounds_played},
                     {"shortfall", p.shortfall},
                     {"episodes_stopped_early", p.episodes_stopped_early}});
  }
  manifest["early_stop"] = early;
  manifest["outputs"] = {{"metrics", "metrics.csv"},
                         {"arms", "arms.csv"},
                         {"histogram", "histogram.csv"},
                         {"timing", "timing.csv"}};

  try {
    write_file(dir / "metrics.csv", render([&](auto& os) { write_metrics_csv(os, metrics); }));
    write_file(dir / "arms.csv", render([&](auto& os) { write_arms_csv(os, env); }));
    write_file(dir / "histogram.csv",
               render([&](auto& os) { write_histogram_csv(os, metrics); }));
    write_file(dir / "timing.csv", render([&](auto& os) { write_timing_csv(os, metrics); }));
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitOutput;
  }

  if (request.verbosity != Verbosity::quiet) {
    print_summary(out, metrics);
    out << "wrote " << dir.string() << '\n';
  }
  return kExitOk;
}

int cmd_validate(const std::filesystem::path& config_path, std::ostream& out,
                 std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const ConfigError& e) {
    err << "error: " << config_path.string() << ": " << e.what() << '\n';
    return kExitBadConfig;
  }
  const Environment env(config.environment);
  const auto arms = env.arms();
  const auto& table = env.means();
  out << config.name << ": " << table.num_arms() << " arms, horizon " << config.horizon
      << ", " << config.episodes << " episodes\n";
  out << std::setw(6) << "arm" << "  prices" << '\n';
  for (int k = 0; k < table.num_arms(); ++k) {
    out << std::setw(6) << k << "  ";
    if (!arms.empty()) {
      out << '[';
      for (std::size_t i = 0; i < arms[k].prices.size(); ++i) {
        out << (i ? " " : "") << format_double(arms[k].prices[i]);
      }
      out << "]  ";
    }
    out << "mu=" << format_double(table.means()[k]) << "  gap="
        << format_double(table.gaps()[k]) << '\n';
  }
  out << "best arm " << table.best_arm() << " mu=" << format_double(table.best_mean());
  if (!arms.empty()) {
    out << " prices=[";
    const auto& best = arms[table.best_arm()].prices;
    for (std::size_t i = 0; i < best.size(); ++i) {
      out << (i ? " " : "") << format_double(best[i]);
    }
    out << ']';
  }
  out << '\n';
  return kExitOk;
}

std::vector<double> timing_instance_means(int num_arms) {
  if (num_arms < 2) throw ConfigError("timing instances need K >= 2");
  std::vector<double> means(num_arms);
  for (int k = 0; k < num_arms; ++k) {
    means[k] = 0.1 + 0.8 * static_cast<double>(k) / static_cast<double>(num_arms - 1);
  }
  return means;
}

std::vector<TimingRow> bench_timing(const BenchTimingRequest& request) {
  if (request.k_list.empty()) throw ConfigError("k list is empty");
  if (request.trials < 1) throw ConfigError("trials must be at least 1");
  std::vector<TimingRow> rows;
  for (int k : request.k_list) {
    if (k < 2) throw ConfigError("every K must be at least 2");
    if (request.horizon < k) throw ConfigError("horizon must be at least every K");
  }
  for (int k : request.k_list) {
    ExperimentConfig config;
    config.environment = BernoulliArmsSetup{timing_instance_means(k)};
    config.horizon = request.horizon;
    for (auto kind : {PolicyKind::kl_ucb, PolicyKind::moss, PolicyKind::ucb,
                      PolicyKind::thompson, PolicyKind::epsilon_greedy}) {
      PolicyConfig p;
      p.kind = kind;
      config.policies.push_back(p);
    }
    const Environment env(config.environment);
    for (const auto& policy : config.resolved_policies()) {
      std::vector<double> seconds;
      for (int trial = 0; trial < request.trials; ++trial) {
        const auto keys = episode_keys(request.seed, policy.label, trial);
        seconds.push_back(run_episode(env, policy, request.horizon, keys).decision_seconds);
      }
      double mean = 0.0;
      for (double s : seconds) mean += s;
      mean /= static_cast<double>(seconds.size());
      double var = 0.0;
      for (double s : seconds) var += (s - mean) * (s - mean);
      const double sd =
          seconds.size() > 1 ? std::sqrt(var / static_cast<double>(seconds.size() - 1)) : 0.0;
      rows.push_back({policy.label, k, mean, sd});
    }
  }
  return rows;
}

int cmd_bench_timing(const BenchTimingRequest& request, std::ostream& out,
                     std::ostream& err) {
  std::vector<TimingRow> rows;
  try {
    rows = bench_timing(request);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  std::ostringstream csv;
  csv << "policy,K,mean_seconds,std_seconds\n";
  for (const auto& r : rows) {
    csv << csv_field(r.policy) << ',' << r.num_arms << ',' << format_double(r.mean_seconds)
        << ',' << format_double(r.std_seconds) << '\n';
  }
  if (request.out_path.empty()) {
    out << csv.str();
    return kExitOk;
  }
  try {
    write_file(request.out_path, csv.str());
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitOutput;
  }
  if (request.verbosity != Verbosity::quiet) {
    for (const auto& r : rows) {
      out << std::left << std::setw(18) << r.policy << std::right << std::setw(6)
          << r.num_arms << std::setw(14) << format_double(r.mean_seconds) << std::setw(14)
          << format_double(r.std_seconds) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace edgeprice::cli
