#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nkmart::cli {

struct ExperimentConfig {
  std::string experiment;
  std::optional<std::string> scenario;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::size_t> n_paths;
  std::optional<double> dt;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "nkmart-output";
};

const std::vector<std::string>& experiment_names();

// Strict parsing: unknown keys, a missing seed, or a malformed field throw InvalidArgument.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 2;

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  nlohmann::json report;
};

// Runs the experiment and writes report.json, data.csv and manifest.json into output_dir.
// Errors are reported through exit_code 1 and message rather than thrown.
RunResult run_experiment(const ExperimentConfig& config);

// One line per scenario: name | anchor | oracle names.
std::string scenario_table();

}  // namespace nkmart::cli
