#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coopscat::scenario {

namespace fs = std::filesystem;

OutputSet::OutputSet(const fs::path& out_dir, const std::string& scenario)
    : scenario_(scenario), final_dir_(out_dir / scenario), staging_(out_dir / (".partial-" + scenario)) {
  fs::create_directories(out_dir);
  fs::remove_all(staging_);
  fs::create_directory(staging_);
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

fs::path OutputSet::path(const std::string& file) {
  if (std::find(files_.begin(), files_.end(), file) != files_.end())
    throw std::logic_error("output file written twice: " + file);
  files_.push_back(file);
  return staging_ / file;
}

void OutputSet::write_text(const std::string& file, const std::string& content) {
  const fs::path p = path(file);
  std::ofstream os(p, std::ios::binary);
  os << content;
  if (!os) throw fs::filesystem_error("cannot write output", p, std::make_error_code(std::errc::io_error));
}

Manifest OutputSet::commit() {
  for (const auto& f : files_)
    if (!fs::exists(staging_ / f))
      throw fs::filesystem_error("output missing", staging_ / f, std::make_error_code(std::errc::io_error));
  fs::remove_all(final_dir_);
  fs::rename(staging_, final_dir_);
  committed_ = true;
  return Manifest{scenario_, final_dir_, files_};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{}", v);
}

Csv::Csv(OutputSet& out, const std::string& file, std::vector<std::string> header) : columns_(header.size()) {
  const fs::path p = out.path(file);
  path_ = p.string();
  stream_.open(p, std::ios::binary);
  if (!stream_) throw fs::filesystem_error("cannot create output", p, std::make_error_code(std::errc::io_error));
  for (std::size_t i = 0; i < header.size(); ++i) stream_ << (i ? "," : "") << header[i];
  stream_ << '\n';
}

Csv::~Csv() { stream_.close(); }

Csv& Csv::add(double v) { return add(format_number(v)); }

Csv& Csv::add(long long v) { return add(std::to_string(v)); }

Csv& Csv::add(const std::string& v) {
  if (in_row_ >= columns_) throw std::logic_error("too many CSV columns in " + path_);
  stream_ << (in_row_ ? "," : "") << v;
  ++in_row_;
  return *this;
}

void Csv::end_row() {
  if (in_row_ != columns_) throw std::logic_error("incomplete CSV row in " + path_);
  stream_ << '\n';
  in_row_ = 0;
  if (!stream_) throw fs::filesystem_error("write failed", fs::path(path_), std::make_error_code(std::errc::io_error));
}

double SpectrumRun::r_peak() const {
  if (r_fit) return r_fit->offset + r_fit->amplitude;
  return spectrum.r_mean.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : *std::max_element(spectrum.r_mean.begin(), spectrum.r_mean.end());
}

double SpectrumRun::a_peak() const {
  if (t_fit) return 1.0 - (t_fit->offset + t_fit->amplitude);
  return spectrum.a_mean.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : *std::max_element(spectrum.a_mean.begin(), spectrum.a_mean.end());
}

namespace {

std::optional<LorentzianFit> try_fit(const SpectrumResult& s, SpectrumChannel channel, const FitOptions& fo) {
  try {
    return fit_spectrum(s, channel, fo);
  } catch (const NumericalError&) {
    return std::nullopt;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

SpectrumRun run_spectrum(const Context& ctx, const SimulationConfig& sim, const std::string& label) {
  const auto& st = ctx.config.scan;
  const auto grid = linear_grid(st.grid_min, st.grid_max, static_cast<std::size_t>(st.grid_points));
  const std::size_t n = ctx.samples_for(sim.geometry);
  ScanOptions so;
  so.threads = ctx.threads;
  ctx.note(fmt::format("{}: {} sample(s) x {} detunings", label, n, grid.size()));

  SpectrumRun run;
  run.spectrum = scan(sim, grid, n, st.seed, so);
  FitOptions fo;
  fo.fit_offset = st.fit_offset;
  run.t_fit = try_fit(run.spectrum, SpectrumChannel::transmittance, fo);
  if (st.refine) {
    const auto& guide = run.t_fit ? run.t_fit : try_fit(run.spectrum, SpectrumChannel::reflectance, fo);
    if (guide && guide->center > st.grid_min && guide->center < st.grid_max && guide->width > 0.0 &&
        guide->width < st.grid_max - st.grid_min) {
      const auto extra = refinement_grid(guide->center, st.refine_half_span * guide->width,
                                         static_cast<std::size_t>(st.refine_points), grid);
      if (!extra.empty()) {
        ctx.note(fmt::format("{}: refining {} detunings around {:.4f}", label, extra.size(), guide->center));
        run.spectrum = merge_spectra(run.spectrum, scan(sim, extra, n, st.seed, so));
      }
    }
  }
  run.t_fit = try_fit(run.spectrum, SpectrumChannel::transmittance, fo);
  run.r_fit = try_fit(run.spectrum, SpectrumChannel::reflectance, fo);
  return run;
}

std::vector<std::string> fit_columns() {
  return {"amplitude",    "amplitude_err",     "center_Gamma0", "center_err_Gamma0", "width_Gamma0",
          "width_err_Gamma0", "offset",        "offset_err",    "reduced_chi2",      "converged",
          "width_at_grid_resolution"};
}

void add_fit(Csv& csv, const std::optional<LorentzianFit>& fit) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!fit) {
    for (int i = 0; i < 9; ++i) csv.add(nan);
    csv.add(false).add(false);
    return;
  }
  csv.add(fit->amplitude).add(fit->amplitude_error());
  csv.add(fit->center).add(fit->center_error());
  csv.add(fit->width).add(fit->width_error());
  csv.add(fit->offset).add(fit->offset_error());
  csv.add(fit->reduced_chi2).add(fit->converged).add(fit->width_at_grid_resolution);
}

std::vector<std::string> spectrum_columns() {
  return {"detuning_Gamma0", "R_mean", "R_sem", "T_mean", "T_sem", "A_mean", "A_sem"};
}

void add_spectrum_rows(Csv& csv, const std::vector<std::string>& keys, const SpectrumResult& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const auto& k : keys) csv.add(k);
    csv.add(s.detuning[i]).add(s.r_mean[i]).add(s.r_sem[i]).add(s.t_mean[i]).add(s.t_sem[i]);
    csv.add(s.a_mean[i]).add(s.a_sem[i]);
    csv.end_row();
  }
}

void knob_error(const Context& ctx, const std::string& key, const std::string& message) {
  throw ConfigError({"/sweeps/" + ctx.name + "/" + key + ": " + message});
}

namespace {

const nlohmann::json& knob(const Context& ctx, const std::string& key) {
  const auto it = ctx.sweep.find(key);
  if (it == ctx.sweep.end()) knob_error(ctx, key, "missing");
  return *it;
}

}  // namespace

double knob_number(const Context& ctx, const std::string& key) {
  const auto& v = knob(ctx, key);
  if (!v.is_number()) knob_error(ctx, key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) knob_error(ctx, key, "must be finite");
  return d;
}

long long knob_integer(const Context& ctx, const std::string& key, long long min_value) {
  const auto& v = knob(ctx, key);
  if (!v.is_number_integer()) knob_error(ctx, key, "expected an integer");
  const long long n = v.get<long long>();
  if (n < min_value) knob_error(ctx, key, "must be >= " + std::to_string(min_value));
  return n;
}

std::vector<double> knob_numbers(const Context& ctx, const std::string& key) {
  const auto& v = knob(ctx, key);
  if (!v.is_array() || v.empty()) knob_error(ctx, key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) knob_error(ctx, key, "expected finite numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> knob_range(const Context& ctx, const std::string& key) {
  const auto& v = knob(ctx, key);
  if (!v.is_object() || !v.contains("min") || !v.contains("max") || !v.contains("points"))
    knob_error(ctx, key, "expected {\"min\", \"max\", \"points\"}");
  if (!v["min"].is_number() || !v["max"].is_number()) knob_error(ctx, key, "min and max must be numbers");
  if (!v["points"].is_number_integer() || v["points"].get<long long>() < 1)
    knob_error(ctx, key, "points must be an integer >= 1");
  const double lo = v["min"].get<double>();
  const double hi = v["max"].get<double>();
  const auto n = static_cast<std::size_t>(v["points"].get<long long>());
  if (!(hi >= lo) || (n > 1 && !(hi > lo))) knob_error(ctx, key, "max must exceed min");
  return linear_grid(lo, hi, n);
}

std::string knob_string(const Context& ctx, const std::string& key) {
  const auto& v = knob(ctx, key);
  if (!v.is_string()) knob_error(ctx, key, "expected a string");
  return v.get<std::string>();
}

GeometryModel named_geometry(const Context& ctx, const std::string& name, double vertical_sigma_a, double spread_a) {
  GeometryModel g = ctx.config.sim.geometry;
  const ConfigKind planar = g.traps.filling < 1.0 ? ConfigKind::reduced_filling : ConfigKind::ordered_2d;
  g.spread = {};
  if (name == "ordered_2d") {
    g.kind = planar;
  } else if (name == "ground_state_spread") {
    g.kind = planar;
    g.spread = SpreadSpec::isotropic(spread_a);
  } else if (name == "vertical_disorder") {
    g.kind = ConfigKind::vertical_disorder;
    g.traps.vertical_sigma = vertical_sigma_a;
  } else if (name == "pancake_uniform") {
    g.kind = ConfigKind::pancake_uniform;
  } else {
    knob_error(ctx, "configurations", "unknown configuration '" + name + "'");
  }
  return g;
}

double effective_filling(const GeometryModel& g) {
  return g.kind == ConfigKind::pancake_uniform ? g.traps.pancake_density : g.traps.filling;
}

}  // namespace coopscat::scenario
