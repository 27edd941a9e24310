#include "edgeprice/cli/results_io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

namespace edgeprice::cli {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_metrics_csv(std::ostream& os, const ExperimentMetrics& m) {
  os << "policy,checkpoint_t,mean_cum_reward,se_reward,mean_pseudo_regret,se_regret,"
        "mean_realized_regret,se_realized_regret\n";
  for (const auto& p : m.policies) {
    const std::string label = csv_field(p.label);
    for (std::size_t c = 0; c < m.checkpoints.size(); ++c) {
      os << label << ',' << m.checkpoints[c] << ',' << format_double(p.mean_cum_reward[c])
         << ',' << format_double(p.se_cum_reward[c]) << ','
         << format_double(p.mean_pseudo_regret[c]) << ','
         << format_double(p.se_pseudo_regret[c]) << ','
         << format_double(p.mean_realized_regret[c]) << ','
         << format_double(p.se_realized_regret[c]) << '\n';
    }
  }
}

void write_arms_csv(std::ostream& os, const Environment& env) {
  const auto arms = env.arms();
  const auto& table = env.means();
  os << "arm_id";
  if (const auto* m = std::get_if<MarketSetup>(&env.spec())) {
    for (int i = 0; i < m->grid.num_vm_types(); ++i) {
      for (int j = 0; j < m->grid.num_edge_nodes(); ++j) {
        os << ",price_" << i << '_' << j;
      }
    }
  }
  os << ",mu,gap\n";
  for (int k = 0; k < table.num_arms(); ++k) {
    os << k;
    if (!arms.empty()) {
      for (double p : arms[k].prices) os << ',' << format_double(p);
    }
    os << ',' << format_double(table.means()[k]) << ',' << format_double(table.gaps()[k])
       << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const ExperimentMetrics& m) {
  os << "policy,arm_id,mean_selection_count\n";
  for (const auto& p : m.policies) {
    const std::string label = csv_field(p.label);
    for (std::size_t k = 0; k < p.selection_counts.size(); ++k) {
      os << label << ',' << k << ','
         << format_double(static_cast<double>(p.selection_counts[k]) / m.episodes) << '\n';
    }
  }
}

void write_timing_csv(std::ostream& os, const ExperimentMetrics& m) {
  os << "policy,total_decision_seconds,median_round_seconds\n";
  for (const auto& p : m.policies) {
    os << csv_field(p.label) << ',' << format_double(p.total_decision_seconds) << ','
       << format_double(p.median_round_seconds) << '\n';
  }
}

nlohmann::json arms_to_json(const Environment& env) {
  nlohmann::json out = nlohmann::json::array();
  const auto arms = env.arms();
  const auto& table = env.means();
  for (int k = 0; k < table.num_arms(); ++k) {
    nlohmann::json a;
    a["arm_id"] = k;
    if (!arms.empty()) {
      a["prices"] = std::vector<double>(arms[k].prices.begin(), arms[k].prices.end());
    }
    a["mu"] = table.means()[k];
    a["gap"] = table.gaps()[k];
    out.push_back(std::move(a));
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError(path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw OutputError(path.string() + ": write failed");
}

}  // namespace edgeprice::cli
