#pragma once

// Named scenarios. Each one reads the shared configuration plus its own
// block under "sweeps", runs, and writes CSV files and metadata.json into
// <out>/<scenario>/. Output appears only when the whole scenario succeeded.

#include "coopscat/config.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopscat {

class UnknownScenario : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
  nlohmann::json sweep_defaults;
};

const std::vector<ScenarioInfo>& scenario_catalog();
const ScenarioInfo& find_scenario(const std::string& name);

struct RunOptions {
  std::optional<std::uint64_t> seed;      // replaces scan.seed
  std::optional<std::size_t> samples;     // replaces scan.samples
  std::optional<unsigned> threads;        // replaces scan.threads
  std::function<void(const std::string&)> log;
};

struct Manifest {
  std::string scenario;
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory, in write order
};

/// Throws UnknownScenario, ConfigError, NumericalError or
/// std::filesystem::filesystem_error. Partial outputs are removed on failure.
Manifest run_scenario(const std::string& name, const RunConfig& config, const std::filesystem::path& out_dir,
                      const RunOptions& options = {});

/// Sweep knobs of one scenario: defaults with the document's entries merged
/// in. Throws ConfigError for unknown keys or mistyped values.
nlohmann::json sweep_settings(const RunConfig& config, const std::string& scenario);

/// Normalized document (defaults and every scenario's sweep block written
/// out). Throws ConfigError listing every problem.
nlohmann::json validate_config(const std::string& path);
nlohmann::json normalize_config(const nlohmann::json& document);

}  // namespace coopscat
