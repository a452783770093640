#pragma once

// Helpers shared by the scenario implementations (not installed).

#include "coopscat/scenarios.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace coopscat::scenario {

/// Files are written into a hidden staging directory and moved into place
/// by commit(); anything uncommitted is deleted on destruction.
class OutputSet {
public:
  OutputSet(const std::filesystem::path& out_dir, const std::string& scenario);
  ~OutputSet();
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  std::filesystem::path path(const std::string& file);
  void write_text(const std::string& file, const std::string& content);
  Manifest commit();

  const std::vector<std::string>& files() const { return files_; }

private:
  std::string scenario_;
  std::filesystem::path final_dir_;
  std::filesystem::path staging_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

/// Comma-separated table with a fixed header; numbers use the shortest
/// round-trip representation so reruns compare byte for byte.
class Csv {
public:
  Csv(OutputSet& out, const std::string& file, std::vector<std::string> header);
  ~Csv();

  Csv& add(double v);
  Csv& add(long long v);
  Csv& add(std::size_t v) { return add(static_cast<long long>(v)); }
  Csv& add(int v) { return add(static_cast<long long>(v)); }
  Csv& add(bool v) { return add(static_cast<long long>(v ? 1 : 0)); }
  Csv& add(const std::string& v);
  Csv& add(const char* v) { return add(std::string(v)); }
  void end_row();

private:
  std::ofstream stream_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::string path_;
};

std::string format_number(double v);

struct Context {
  std::string name;
  RunConfig config;             // overrides applied, seed/samples replaced
  nlohmann::json sweep;         // materialized sweep knobs
  unsigned threads = 1;
  std::function<void(const std::string&)> log;

  void note(const std::string& message) const {
    if (log) log(message);
  }
  std::size_t samples_for(const GeometryModel& g) const { return config.scan.samples_for(g); }
};

/// Fitted spectrum with the refinement pass applied when configured.
struct SpectrumRun {
  SpectrumResult spectrum;
  std::optional<LorentzianFit> r_fit;
  std::optional<LorentzianFit> t_fit;

  double r_peak() const;  // fitted, falls back to the sampled maximum
  double a_peak() const;  // 1 - fitted transmission minimum
};

SpectrumRun run_spectrum(const Context& ctx, const SimulationConfig& sim, const std::string& label);

/// Header and one row writer for per-point fit summaries.
std::vector<std::string> fit_columns();
void add_fit(Csv& csv, const std::optional<LorentzianFit>& fit);

/// Long-format spectrum rows, prefixed by caller-defined key columns.
std::vector<std::string> spectrum_columns();
void add_spectrum_rows(Csv& csv, const std::vector<std::string>& keys, const SpectrumResult& s);

/// Knob readers with the path used in error messages.
double knob_number(const Context& ctx, const std::string& key);
long long knob_integer(const Context& ctx, const std::string& key, long long min_value);
std::vector<double> knob_numbers(const Context& ctx, const std::string& key);
std::vector<double> knob_range(const Context& ctx, const std::string& key);  // {"min","max","points"}
std::string knob_string(const Context& ctx, const std::string& key);
[[noreturn]] void knob_error(const Context& ctx, const std::string& key, const std::string& message);

/// Layouts shared by the comparison scenarios: ordered_2d, ground_state_spread,
/// vertical_disorder, pancake_uniform. Filling, density and the remaining
/// geometry settings come from the base configuration.
GeometryModel named_geometry(const Context& ctx, const std::string& name, double vertical_sigma_a, double spread_a);

/// Filling fraction used to normalize responses (atoms per site area for pancakes).
double effective_filling(const GeometryModel& g);

using Runner = void (*)(const Context&, OutputSet&);

void pair_sweep(const Context& ctx, OutputSet& out);
void spacing_sweep(const Context& ctx, OutputSet& out);
void geometry_compare(const Context& ctx, OutputSet& out);
void filling_sweep(const Context& ctx, OutputSet& out);
void bloch(const Context& ctx, OutputSet& out);
void spread_sweep(const Context& ctx, OutputSet& out);
void effect_ladder(const Context& ctx, OutputSet& out);
void na_sweep(const Context& ctx, OutputSet& out);
void mode_pdf(const Context& ctx, OutputSet& out);
void intensity_map(const Context& ctx, OutputSet& out);

}  // namespace coopscat::scenario
