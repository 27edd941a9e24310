#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "edgeprice/runner.hpp"

namespace edgeprice::cli {

// Malformed or incomplete config file. what() carries a line/field diagnostic.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config document normalized to JSON, plus the source line of each field
/// (keyed by dotted path such as "market.num_arms" or "policy[1].kind") when
/// the source format tracks it.
struct ConfigDocument {
  nlohmann::json root;
  std::map<std::string, int> lines;
  std::string source_name;
};

ConfigDocument parse_toml_document(std::string_view text, std::string source_name);
// Accepts either a bare config object or a run manifest (uses its "config").
ConfigDocument parse_json_document(std::string_view text, std::string source_name);

ExperimentConfig config_from_document(const ConfigDocument& doc);

// Dispatches on extension: .json is JSON, anything else TOML.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_toml(std::string_view text,
                                   std::string source_name = "<config>");

/// Fully resolved config (defaults, price levels, policy parameters and
/// checkpoints spelled out). Feeding it back through config_from_document
/// yields the same experiment.
nlohmann::json config_to_json(const ExperimentConfig& config);

/// "geometric", "linear:N" or a comma-separated list of rounds.
std::vector<std::int64_t> parse_checkpoint_spec(std::string_view spec,
                                                std::int64_t horizon);

}  // namespace edgeprice::cli
