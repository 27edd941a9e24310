#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "edgeprice/runner.hpp"

namespace edgeprice::cli {

// An output file could not be created or written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nine significant digits, as "%.9g".
std::string format_double(double x);
// RFC-4180 field quoting, applied only when needed.
std::string csv_field(std::string_view text);

// policy,checkpoint_t,mean_cum_reward,se_reward,mean_pseudo_regret,se_regret,
// mean_realized_regret,se_realized_regret
void write_metrics_csv(std::ostream& os, const ExperimentMetrics& metrics);
// arm_id,price_<i>_<j>...,mu,gap (no price columns for Bernoulli arms)
void write_arms_csv(std::ostream& os, const Environment& env);
// policy,arm_id,mean_selection_count
void write_histogram_csv(std::ostream& os, const ExperimentMetrics& metrics);
// policy,total_decision_seconds,median_round_seconds
void write_timing_csv(std::ostream& os, const ExperimentMetrics& metrics);

nlohmann::json arms_to_json(const Environment& env);

// Writes `content` to `path`, creating parent directories. Throws OutputError.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace edgeprice::cli
