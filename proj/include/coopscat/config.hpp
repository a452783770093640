#pragma once

// JSON configuration. Physical quantities are objects {"value": ..., "unit": ...};
// counts, flags and dimensionless numbers are plain JSON values. See
// docs/formats.md for the schema.

#include "coopscat/spectro.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopscat {

/// Every violation found while reading a configuration, each prefixed with a
/// JSON pointer into the document.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

private:
  std::vector<std::string> errors_;
};

struct ScanSettings {
  double grid_min = -2.5;  // Gamma0
  double grid_max = 2.5;
  int grid_points = 31;
  bool refine = true;
  int refine_points = 31;
  double refine_half_span = 1.5;  // in fitted widths
  std::optional<std::size_t> samples;  // unset: 200 for random geometries, 1 otherwise
  std::uint64_t seed = 1;
  bool fit_offset = true;
  unsigned threads = 0;  // 0: hardware concurrency

  std::size_t samples_for(const GeometryModel& geometry) const;
};

struct RunConfig {
  SimulationConfig sim{};
  ScanSettings scan{};
  nlohmann::json sweeps = nlohmann::json::object();     // per-scenario sweep knobs
  nlohmann::json overrides = nlohmann::json::object();  // per-scenario patches of this document
};

/// Reads a document; missing keys take their defaults. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& document);

/// Reads and parses a file. Throws ConfigError (also for unreadable files
/// and JSON syntax errors).
RunConfig load_config(const std::string& path);

/// Normalized document with every default written out.
nlohmann::json to_json(const RunConfig& config);

/// Base document with overrides[scenario] merge-patched on top.
RunConfig apply_overrides(const RunConfig& config, const std::string& scenario);

std::string to_string(PolarizationModel model);
std::string to_string(BeamDirection direction);

}  // namespace coopscat
