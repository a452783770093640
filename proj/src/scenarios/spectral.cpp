// Scenarios built from disorder-averaged detuning spectra.

#include "common.hpp"

#include <cmath>
#include <limits>

namespace coopscat::scenario {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double width_of(const std::optional<LorentzianFit>& f) { return f ? f->width : kNaN; }
double center_of(const std::optional<LorentzianFit>& f) { return f ? f->center : kNaN; }

void add_fit_rows(Csv& csv, const std::vector<std::string>& keys, const SpectrumRun& run) {
  for (const auto& [channel, fit] : {std::pair{"R", &run.r_fit}, std::pair{"T", &run.t_fit}}) {
    for (const auto& k : keys) csv.add(k);
    csv.add(channel);
    add_fit(csv, *fit);
    csv.end_row();
  }
}

std::vector<std::string> with_prefix(std::vector<std::string> keys, const std::vector<std::string>& rest) {
  keys.insert(keys.end(), rest.begin(), rest.end());
  return keys;
}

std::vector<std::string> summary_columns(std::vector<std::string> keys) {
  return with_prefix(std::move(keys), {"samples", "failures", "R_peak", "A_peak", "R_width_Gamma0", "T_width_Gamma0",
                                       "R_center_Gamma0", "T_center_Gamma0", "T_width_err_Gamma0"});
}

void add_summary(Csv& csv, const std::vector<std::string>& keys, const SpectrumRun& run) {
  for (const auto& k : keys) csv.add(k);
  csv.add(run.spectrum.n_samples).add(run.spectrum.failures);
  csv.add(run.r_peak()).add(run.a_peak());
  csv.add(width_of(run.r_fit)).add(width_of(run.t_fit));
  csv.add(center_of(run.r_fit)).add(center_of(run.t_fit));
  csv.add(run.t_fit ? run.t_fit->width_error() : kNaN);
  csv.end_row();
}

std::string key(double v) { return format_number(v); }

/// The three tables every spectrum scenario writes, keyed by its own columns.
struct SpectrumTables {
  Csv spectra, fits, summary;

  SpectrumTables(OutputSet& out, const std::vector<std::string>& keys)
      : spectra(out, "spectra.csv", with_prefix(keys, spectrum_columns())),
        fits(out, "fits.csv", with_prefix(with_prefix(keys, {"channel"}), fit_columns())),
        summary(out, "summary.csv", summary_columns(keys)) {}

  void add(const std::vector<std::string>& keys, const SpectrumRun& run) {
    add_spectrum_rows(spectra, keys, run.spectrum);
    add_fit_rows(fits, keys, run);
    add_summary(summary, keys, run);
  }
};

}  // namespace

void geometry_compare(const Context& ctx, OutputSet& out) {
  const double vsigma = knob_number(ctx, "vertical_sigma_a");
  const double spread = knob_number(ctx, "spread_a");
  SpectrumTables tables(out, {"configuration"});
  for (const auto& c : ctx.sweep.at("configurations")) {
    const std::string name = c.get<std::string>();
    SimulationConfig sim = ctx.config.sim;
    sim.geometry = named_geometry(ctx, name, vsigma, spread);
    tables.add({name}, run_spectrum(ctx, sim, name));
  }
}

void filling_sweep(const Context& ctx, OutputSet& out) {
  const auto fillings = knob_numbers(ctx, "fillings");
  const double sxy = knob_number(ctx, "sigma_xy_a");
  const auto sz = knob_numbers(ctx, "sigma_z_a");
  for (double f : fillings)
    if (!(f > 0.0 && f <= 1.0)) knob_error(ctx, "fillings", "fillings must lie in (0, 1]");
  if (sxy < 0.0) knob_error(ctx, "sigma_xy_a", "must be >= 0");
  for (double s : sz)
    if (s < 0.0) knob_error(ctx, "sigma_z_a", "spreads must be >= 0");

  SpectrumTables tables(out, {"filling", "sigma_z_a"});
  Csv shift(out, "shift.csv", {"sigma_z_a", "filling", "center_Gamma0", "center_err_Gamma0"});
  for (double s : sz) {
    std::vector<double> ok_fillings;
    std::vector<LorentzianFit> fits;
    for (double f : fillings) {
      SimulationConfig sim = ctx.config.sim;
      sim.geometry.kind = f < 1.0 ? ConfigKind::reduced_filling : ConfigKind::ordered_2d;
      sim.geometry.traps.filling = f;
      sim.geometry.spread = {sxy, sxy, s};
      const SpectrumRun run = run_spectrum(ctx, sim, fmt::format("eta = {}, sigma_z = {} a", f, s));
      tables.add({key(f), key(s)}, run);
      if (run.t_fit) {
        ok_fillings.push_back(f);
        fits.push_back(*run.t_fit);
      }
    }
    if (fits.size() < 2) continue;
    for (const auto& p : resonance_shift(ok_fillings, fits)) {
      shift.add(s).add(p.parameter).add(p.center).add(p.center_error);
      shift.end_row();
    }
  }
}

void bloch(const Context& ctx, OutputSet& out) {
  const auto times = knob_range(ctx, "time_TB");
  for (double t : times)
    if (t < 0.0) knob_error(ctx, "time_TB", "times must be >= 0");
  SpectrumTables tables(out, {"time_TB"});
  Csv table(out, "bloch.csv",
            {"time_TB", "zeta", "R_peak", "A_peak", "R_width_Gamma0", "T_width_Gamma0", "R_center_Gamma0",
             "T_center_Gamma0"});
  for (double t : times) {
    SimulationConfig sim = ctx.config.sim;
    sim.geometry.kind = ConfigKind::bloch_breathing;
    sim.geometry.traps.bloch.time = t;
    const SpectrumRun run = run_spectrum(ctx, sim, fmt::format("t = {} T_B", t));
    tables.add({key(t)}, run);
    table.add(t).add(breathing_argument(sim.geometry.traps.bloch)).add(run.r_peak()).add(run.a_peak());
    table.add(width_of(run.r_fit)).add(width_of(run.t_fit)).add(center_of(run.r_fit)).add(center_of(run.t_fit));
    table.end_row();
  }
}

void spread_sweep(const Context& ctx, OutputSet& out) {
  const auto spreads = knob_range(ctx, "spread_a");
  const double ground = knob_number(ctx, "ground_spread_a");
  const double small = knob_number(ctx, "small_waist_a");
  if (spreads.front() < 0.0) knob_error(ctx, "spread_a", "spreads must be >= 0");
  if (ground < 0.0) knob_error(ctx, "ground_spread_a", "must be >= 0");
  if (!(small > 0.0)) knob_error(ctx, "small_waist_a", "must be > 0");

  SpectrumTables tables(out, {"variant", "spread_a"});
  for (const auto& v : ctx.sweep.at("variants")) {
    const std::string variant = v.get<std::string>();
    for (double s : spreads) {
      SimulationConfig sim = ctx.config.sim;
      if (variant == "x_only") {
        sim.geometry.spread = {s, 0.0, 0.0};
      } else if (variant == "z_only") {
        sim.geometry.spread = {0.0, 0.0, s};
      } else if (variant == "all_axes") {
        sim.geometry.spread = SpreadSpec::isotropic(s);
      } else if (variant == "z_with_ground_xy") {
        sim.geometry.spread = {ground, ground, s};
      } else if (variant == "all_axes_small_beam") {
        sim.geometry.spread = SpreadSpec::isotropic(s);
        sim.beam.waist_a = small;
      } else {
        knob_error(ctx, "variants", "unknown variant '" + variant + "'");
      }
      tables.add({variant, key(s)}, run_spectrum(ctx, sim, fmt::format("{}, sigma = {} a", variant, s)));
    }
  }
}

void effect_ladder(const Context& ctx, OutputSet& out) {
  const auto fillings = knob_range(ctx, "fillings");
  const double s0 = knob_number(ctx, "ground_spread_a");
  const double heated = knob_number(ctx, "heated_factor");
  for (double f : fillings)
    if (!(f > 0.0 && f <= 1.0)) knob_error(ctx, "fillings", "fillings must lie in (0, 1]");
  if (s0 < 0.0) knob_error(ctx, "ground_spread_a", "must be >= 0");
  if (!(heated > 0.0)) knob_error(ctx, "heated_factor", "must be > 0");

  SpectrumTables tables(out, {"variant", "filling"});
  // Each rung adds one ingredient to the previous one.
  const char* names[] = {"i", "ii", "iii", "iv", "v"};
  for (int rung = 0; rung < 5; ++rung) {
    for (double f : fillings) {
      SimulationConfig sim = ctx.config.sim;
      sim.geometry.kind = f < 1.0 ? ConfigKind::reduced_filling : ConfigKind::ordered_2d;
      sim.geometry.traps.filling = f;
      sim.geometry.spread = {};
      sim.geometry.local_detuning = false;
      sim.transition.polarization_model = PolarizationModel::isotropic;
      if (rung >= 1) sim.geometry.spread = SpreadSpec::isotropic(s0);
      if (rung >= 2) sim.geometry.spread.sigma_z = heated * s0;
      if (rung >= 3) sim.transition.polarization_model = PolarizationModel::sigma_minus;
      if (rung >= 4) sim.geometry.local_detuning = true;
      tables.add({names[rung], key(f)}, run_spectrum(ctx, sim, fmt::format("({}) eta = {}", names[rung], f)));
    }
  }
}

void na_sweep(const Context& ctx, OutputSet& out) {
  const auto nas = knob_range(ctx, "numerical_aperture");
  for (double na : nas)
    if (!(na > 0.0 && na <= 1.0)) knob_error(ctx, "numerical_aperture", "apertures must lie in (0, 1]");
  const double vsigma = knob_number(ctx, "vertical_sigma_a");
  const double spread = knob_number(ctx, "spread_a");

  Csv table(out, "na_sweep.csv",
            {"configuration", "numerical_aperture", "detuning_Gamma0", "filling", "R_mean", "R_sem", "A_mean", "A_sem",
             "R_over_filling", "A_over_filling"});
  Csv res(out, "resonance.csv", {"configuration", "detuning_Gamma0", "source"});
  for (const auto& c : ctx.sweep.at("configurations")) {
    const std::string name = c.get<std::string>();
    if (name == "mirror") {
      const auto& sim = ctx.config.sim;
      const ScaledUnits units = nondimensionalize(sim.transition, sim.lattice);
      const ScaledBeam beam = scale_beam(sim.beam, sim.lattice, units);
      const double side = units.a_to_k(static_cast<double>(sim.lattice.nx));
      for (double na : nas) {
        DetectionSpec det = sim.detection;
        det.numerical_aperture = na;
        const Observables o = mirror_reference(beam, side, det);
        table.add(name).add(na).add(0.0).add(1.0).add(o.reflectance).add(0.0).add(o.absorptance).add(0.0);
        table.add(o.reflectance).add(o.absorptance);
        table.end_row();
      }
      res.add(name).add(0.0).add("mirror");
      res.end_row();
      continue;
    }
    SimulationConfig sim = ctx.config.sim;
    sim.geometry = named_geometry(ctx, name, vsigma, spread);
    const double eta = effective_filling(sim.geometry);
    // Locate the resonance at the configured aperture, then hold the detuning fixed.
    const SpectrumRun run = run_spectrum(ctx, sim, name);
    double delta = sim.beam.detuning;
    std::string source = "config";
    if (run.t_fit && run.t_fit->center > ctx.config.scan.grid_min && run.t_fit->center < ctx.config.scan.grid_max) {
      delta = run.t_fit->center;
      source = "fit";
    }
    res.add(name).add(delta).add(source);
    res.end_row();
    ScanOptions so;
    so.threads = ctx.threads;
    const std::size_t n = ctx.samples_for(sim.geometry);
    const double grid[] = {delta};
    for (double na : nas) {
      sim.detection.numerical_aperture = na;
      const SpectrumResult s = scan(sim, grid, n, ctx.config.scan.seed, so);
      table.add(name).add(na).add(delta).add(eta).add(s.r_mean[0]).add(s.r_sem[0]).add(s.a_mean[0]).add(s.a_sem[0]);
      table.add(s.r_mean[0] / eta).add(s.a_mean[0] / eta);
      table.end_row();
    }
  }
}

}  // namespace coopscat::scenario
