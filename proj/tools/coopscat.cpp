// coopscat: run a named scenario and write its CSV tables.
//
// exit codes: 0 ok, 1 usage, 2 config error, 3 numerical failure, 4 I/O error

#include "coopscat/scenarios.hpp"
#include "coopscat/simd/kernels.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit { ok = 0, usage = 1, config_error = 2, numerical = 3, io = 4 };

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("COOPSCAT_OUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative light scattering from emitter arrays"};
  app.set_version_flag("--version", std::string(COOPSCAT_VERSION));

  std::string scenario;
  std::string config_path;
  std::string out_dir = default_out_dir().string();
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<unsigned> threads;
  bool list = false;
  bool validate = false;
  bool quiet = false;

  app.add_option("-s,--scenario", scenario, "Scenario to run (see --list)");
  app.add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "Output directory (default: $COOPSCAT_OUT_DIR or ./out)");
  app.add_option("--seed", seed, "Master seed, replaces scan.seed");
  app.add_option("--samples", samples, "Disorder samples per spectrum, replaces scan.samples")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "Worker threads (0: all cores)");
  app.add_flag("--list", list, "List scenarios and exit");
  app.add_flag("--validate", validate, "Print the normalized configuration and exit");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  if (list) {
    for (const auto& s : coopscat::scenario_catalog()) std::cout << s.name << "\t" << s.description << "\n";
    return ok;
  }

  try {
    if (validate) {
      const auto doc = config_path.empty() ? coopscat::normalize_config(nlohmann::json::object())
                                           : coopscat::validate_config(config_path);
      std::cout << doc.dump(2) << "\n";
      return ok;
    }
    if (scenario.empty()) {
      std::cerr << "coopscat: --scenario is required (see --list)\n";
      return usage;
    }
    coopscat::find_scenario(scenario);
    const coopscat::RunConfig cfg =
        config_path.empty() ? coopscat::parse_config(nlohmann::json::object()) : coopscat::load_config(config_path);

    coopscat::RunOptions opts;
    opts.seed = seed;
    opts.samples = samples;
    opts.threads = threads;
    if (!quiet) opts.log = [](const std::string& m) { std::cerr << "[coopscat] " << m << "\n"; };
    if (!quiet) std::cerr << "[coopscat] kernels: " << coopscat::simd::active_kernels().name << "\n";

    const auto manifest = coopscat::run_scenario(scenario, cfg, out_dir, opts);
    for (const auto& f : manifest.files) std::cout << (manifest.directory / f).string() << "\n";
    return ok;
  } catch (const coopscat::UnknownScenario& e) {
    std::cerr << "coopscat: " << e.what() << "\n";
    return usage;
  } catch (const coopscat::ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << "\n";
    return config_error;
  } catch (const coopscat::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const coopscat::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what();
    if (e.seed() != 0) std::cerr << " (sample seed " << e.seed() << ")";
    std::cerr << "\n";
    return numerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io;
  }
}
