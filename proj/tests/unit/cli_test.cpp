#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgeprice/cli/commands.hpp"
#include "edgeprice/cli/config_io.hpp"
#include "edgeprice/cli/results_io.hpp"
#include "edgeprice/errors.hpp"

namespace edgeprice::cli {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("edgeprice_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kSmallConfig = R"(
name = "small"
horizon = 300
episodes = 6
seed = 3

[market]
vm_types = 2
edge_nodes = 1
price_levels = [0.2, 0.4, 0.6, 0.8]

[valuation]
kind = "truncated_exponential"
mean = 2.0
)";

RunRequest quiet_run(const fs::path& config, const fs::path& out) {
  RunRequest r;
  r.config_path = config;
  r.out_dir = out;
  r.verbosity = Verbosity::quiet;
  return r;
}

TEST(ConfigIo, DefaultsAreFilledIn) {
  const auto c = parse_config_toml("horizon = 50\n");
  EXPECT_EQ(c.horizon, 50);
  EXPECT_EQ(c.episodes, 1);
  EXPECT_EQ(c.policies.size(), 5u);
  const auto& m = std::get<MarketSetup>(c.environment);
  EXPECT_EQ(m.levels.size(), 20u);
  EXPECT_EQ(m.num_arms, 20);
  EXPECT_EQ(c.checkpoints, geometric_checkpoints(50));
}

TEST(ConfigIo, MissingHorizonNamesTheField) {
  try {
    parse_config_toml("episodes = 3\n", "cfg.toml");
    FAIL() << "expected a parse error";
  } catch (const ConfigParseError& e) {
    EXPECT_NE(std::string(e.what()).find("horizon"), std::string::npos);
  }
}

TEST(ConfigIo, DiagnosticsCarryLineNumbers) {
  try {
    parse_config_toml("horizon = 50\n\n[market]\nnum_arms = \"many\"\n", "cfg.toml");
    FAIL() << "expected a parse error";
  } catch (const ConfigParseError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.toml:4"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("market.num_arms"), std::string::npos);
  }
  EXPECT_THROW(parse_config_toml("horizon = 50\ntypo = 1\n"), ConfigParseError);
  EXPECT_THROW(parse_config_toml("horizon = \n"), ConfigParseError);
  EXPECT_THROW(parse_config_toml("horizon = 50\n[[policy]]\nkind = \"greedy\"\n"),
               ConfigParseError);
}

TEST(ConfigIo, EchoRoundTrips) {
  const auto c = parse_config_toml(kSmallConfig);
  const auto echoed = config_to_json(c);
  const auto back = config_from_document(ConfigDocument{echoed, {}, "<echo>"});
  EXPECT_EQ(config_to_json(back), echoed);
}

TEST(ConfigIo, CheckpointSpecs) {
  EXPECT_EQ(parse_checkpoint_spec("geometric", 5), (std::vector<std::int64_t>{1, 2, 4, 5}));
  EXPECT_EQ(parse_checkpoint_spec("linear:4", 100),
            (std::vector<std::int64_t>{25, 50, 75, 100}));
  EXPECT_EQ(parse_checkpoint_spec("10,20,100", 100), (std::vector<std::int64_t>{10, 20, 100}));
  EXPECT_THROW(parse_checkpoint_spec("10,5", 100), ConfigError);
  EXPECT_THROW(parse_checkpoint_spec("abc", 100), ConfigError);
}

TEST(ResultsIo, FloatsUseNineSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_double(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(CmdRun, WritesFiveFiles) {
  TempDir dir;
  spit(dir.path() / "c.toml", kSmallConfig);
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(quiet_run(dir.path() / "c.toml", dir.path() / "res"), out, err), kExitOk)
      << err.str();
  for (const char* f : {"manifest.json", "metrics.csv", "arms.csv", "histogram.csv", "timing.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "res" / f)) << f;
  }
  const auto metrics = slurp(dir.path() / "res" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')),
            "policy,checkpoint_t,mean_cum_reward,se_reward,mean_pseudo_regret,se_regret,"
            "mean_realized_regret,se_realized_regret");
  EXPECT_EQ(metrics.find('\r'), std::string::npos);
  const auto arms = slurp(dir.path() / "res" / "arms.csv");
  EXPECT_EQ(arms.substr(0, arms.find('\n')), "arm_id,price_0_0,price_1_0,mu,gap");
  const auto manifest = nlohmann::json::parse(slurp(dir.path() / "res" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 3);
  EXPECT_EQ(manifest["arms"].size(), 4u);
  EXPECT_TRUE(manifest.contains("started_at"));
}

TEST(CmdRun, MissingHorizonExitsTwo) {
  TempDir dir;
  spit(dir.path() / "c.toml", "episodes = 2\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(quiet_run(dir.path() / "c.toml", dir.path() / "res"), out, err),
            kExitBadConfig);
  EXPECT_NE(err.str().find("horizon"), std::string::npos);
}

TEST(CmdRun, UnwritableOutputExitsThree) {
  TempDir dir;
  spit(dir.path() / "c.toml", kSmallConfig);
  spit(dir.path() / "file", "x");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(quiet_run(dir.path() / "c.toml", dir.path() / "file" / "res"), out, err),
            kExitOutput);
}

TEST(CmdRun, SameSeedByteIdenticalMetrics) {
  TempDir dir;
  spit(dir.path() / "c.toml", kSmallConfig);
  std::ostringstream out, err;
  auto a = quiet_run(dir.path() / "c.toml", dir.path() / "a");
  a.seed = 42;
  auto b = quiet_run(dir.path() / "c.toml", dir.path() / "b");
  b.seed = 42;
  b.parallelism = 3;
  ASSERT_EQ(cmd_run(a, out, err), kExitOk);
  ASSERT_EQ(cmd_run(b, out, err), kExitOk);
  EXPECT_EQ(slurp(dir.path() / "a" / "metrics.csv"), slurp(dir.path() / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "histogram.csv"),
            slurp(dir.path() / "b" / "histogram.csv"));
}

TEST(CmdRun, ManifestReproducesMetrics) {
  TempDir dir;
  spit(dir.path() / "c.toml", kSmallConfig);
  std::ostringstream out, err;
  auto first = quiet_run(dir.path() / "c.toml", dir.path() / "a");
  first.seed = 8;
  first.checkpoints = "linear:3";
  ASSERT_EQ(cmd_run(first, out, err), kExitOk);
  ASSERT_EQ(cmd_run(quiet_run(dir.path() / "a" / "manifest.json", dir.path() / "b"), out, err),
            kExitOk)
      << err.str();
  EXPECT_EQ(slurp(dir.path() / "a" / "metrics.csv"), slurp(dir.path() / "b" / "metrics.csv"));
}

TEST(CmdValidate, PrintsArmsAndBest) {
  TempDir dir;
  spit(dir.path() / "c.toml", R"(
horizon = 100
[market]
price_levels = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
num_arms = 9
)");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_validate(dir.path() / "c.toml", out, err), kExitOk);
  EXPECT_NE(out.str().find("best arm 4 mu=0.25 prices=[0.5]"), std::string::npos) << out.str();
  int rows = 0;
  std::istringstream lines(out.str());
  for (std::string line; std::getline(lines, line);) rows += line.find("mu=") != std::string::npos;
  EXPECT_EQ(rows, 10);  // nine arms plus the best-arm line
}

TEST(CmdValidate, TooManyLadderArmsExitsTwo) {
  TempDir dir;
  spit(dir.path() / "c.toml", "horizon = 100\n[market]\nprice_levels = 3\nnum_arms = 4\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(dir.path() / "c.toml", out, err), kExitBadConfig);
}

TEST(CmdValidate, ShippedConfigsAreValid) {
  for (const char* name : {"edge_uniform.toml", "edge_gaussian.toml", "edge_exponential.toml",
                           "bernoulli_5arm.toml", "smoke.toml"}) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(fs::path(EDGEPRICE_CONFIG_DIR) / name, out, err), kExitOk)
        << name << ": " << err.str();
  }
}

TEST(BenchTiming, OneRowPerPolicyAndK) {
  BenchTimingRequest r;
  r.k_list = {50, 500};
  r.trials = 1;
  r.horizon = 600;
  const auto rows = bench_timing(r);
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& row : rows) {
    EXPECT_GE(row.mean_seconds, 0.0);
    EXPECT_EQ(row.std_seconds, 0.0);
  }
  r.k_list = {1};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bench_timing(r, out, err), kExitBadConfig);
}

TEST(BenchTiming, InstanceMeansAreLinear) {
  const auto m = timing_instance_means(5);
  ASSERT_EQ(m.size(), 5u);
  EXPECT_DOUBLE_EQ(m[0], 0.1);
  EXPECT_DOUBLE_EQ(m[2], 0.5);
  EXPECT_DOUBLE_EQ(m[4], 0.9);
}

}  // namespace
}  // namespace edgeprice::cli
