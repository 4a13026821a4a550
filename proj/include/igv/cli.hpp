#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "igv/scenarios.hpp"
#include "igv/verbalization.hpp"

namespace igv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct AnalysisConfig {
  std::optional<std::filesystem::path> input;  // trajectory CSV to analyze
  std::optional<std::vector<double>> anchors;
  std::optional<double> horizon;
  VerbalizationConfig verbalization;
  bool all = false;  // verbalize: survey the whole catalog
};

struct RunConfig {
  std::string command;
  std::string scenario;
  ScenarioOverrides overrides;
  AnalysisConfig analysis;
  std::filesystem::path out = ".";
};

// Schema-checks a config document. Unknown keys at any level raise Schema.
RunConfig parse_config(const nlohmann::json& doc);

// Runs one command and returns the paths it wrote.
std::vector<std::filesystem::path> execute(const RunConfig& cfg, std::ostream& log);

// Full front end: parses argv, runs, maps failures to exit codes
// (1 validation, 2 runtime).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace igv::cli
