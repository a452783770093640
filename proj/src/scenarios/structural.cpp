// Scenarios that look at geometry and fields rather than averaged spectra.

#include "common.hpp"

#include "coopscat/eigenmodes.hpp"
#include "coopscat/flux.hpp"
#include "coopscat/greens.hpp"

#include <cmath>
#include <limits>

namespace coopscat::scenario {

void pair_sweep(const Context& ctx, OutputSet& out) {
  const auto spacing = knob_range(ctx, "spacing_lambda");
  const std::string axis = knob_string(ctx, "axis");
  if (axis != "x" && axis != "z") knob_error(ctx, "axis", "expected \"x\" or \"z\"");
  for (double s : spacing)
    if (!(s > 0.0)) knob_error(ctx, "spacing_lambda", "separations must be > 0");

  Csv csv(out, "pair_sweep.csv",
          {"separation_lambda", "kr", "delta_sym_Gamma0", "gamma_sym_Gamma0", "delta_anti_Gamma0", "gamma_anti_Gamma0"});
  for (double s : spacing) {
    const double kr = kTwoPi * s;
    const Vec3 sep = axis == "x" ? Vec3(kr, 0, 0) : Vec3(0, 0, kr);
    const PairResponse p = pair_response(sep);
    csv.add(s).add(kr).add(p.delta_sym).add(p.gamma_sym).add(p.delta_anti).add(p.gamma_anti);
    csv.end_row();
  }
}

void spacing_sweep(const Context& ctx, OutputSet& out) {
  const auto spacing = knob_range(ctx, "spacing_lambda");
  for (double s : spacing)
    if (!(s > 0.0)) knob_error(ctx, "spacing_lambda", "spacings must be > 0");
  const auto& sim = ctx.config.sim;

  Csv csv(out, "spacing_sweep.csv",
          {"spacing_lambda", "mode_delta_Gamma0", "mode_gamma_Gamma0", "drive_weight_fraction", "min_gamma_Gamma0",
           "emitters"});
  std::vector<std::array<double, 4>> rows(spacing.size());
  parallel_for(spacing.size(), ctx.threads, [&](std::size_t i) {
    LatticeSpec lat = sim.lattice;
    lat.spacing_over_lambda = spacing[i];
    const ScaledUnits units = nondimensionalize(sim.transition, lat);
    GeometryModel ordered;
    const EnsembleSample sample = draw_ensemble(lat, ordered, units, ctx.config.scan.seed, 0);
    const Scene scene = make_scene(sample, units, sim.transition.polarization_model);
    const ModeSet modes = eigensystem(assemble(scene));
    const ScaledBeam beam = scale_beam(sim.beam, lat, units);
    const ModeDecomposition dec = decompose(modes, drive_vector(scene, beam), sim.beam.detuning);
    // The mode the drive projects onto most strongly, independent of detuning.
    Eigen::Index q = 0;
    const Eigen::VectorXd weight = dec.drive_coefficients.cwiseAbs2();
    weight.maxCoeff(&q);
    rows[i] = {modes.detunings[q], modes.linewidths[q], weight[q] / weight.sum(), modes.linewidths.minCoeff()};
    ctx.note(fmt::format("a/lambda = {:.3f}: Gamma = {:.4f}", spacing[i], modes.linewidths[q]));
  });
  for (std::size_t i = 0; i < spacing.size(); ++i) {
    csv.add(spacing[i]).add(rows[i][0]).add(rows[i][1]).add(rows[i][2]).add(rows[i][3]);
    csv.add(sim.lattice.site_count());
    csv.end_row();
  }
}

void mode_pdf(const Context& ctx, OutputSet& out) {
  const auto& cfgs = ctx.sweep.at("configurations");
  const double vsigma = knob_number(ctx, "vertical_sigma_a");
  const double spread = knob_number(ctx, "spread_a");
  HistogramGrid grid;
  grid.delta_bins = static_cast<int>(knob_integer(ctx, "delta_bins", 1));
  grid.gamma_bins = static_cast<int>(knob_integer(ctx, "gamma_bins", 1));
  const auto dr = knob_numbers(ctx, "delta_range_Gamma0");
  const auto gr = knob_numbers(ctx, "gamma_range_Gamma0");
  if (dr.size() != 2 || !(dr[1] > dr[0])) knob_error(ctx, "delta_range_Gamma0", "expected [min, max] with max > min");
  if (gr.size() != 2 || !(gr[1] > gr[0])) knob_error(ctx, "gamma_range_Gamma0", "expected [min, max] with max > min");
  grid.delta_min = dr[0];
  grid.delta_max = dr[1];
  grid.gamma_min = gr[0];
  grid.gamma_max = gr[1];
  const auto& dk = ctx.sweep.at("detuning_Gamma0");
  const double delta = dk.is_null() ? ctx.config.sim.beam.detuning : dk.get<double>();

  const auto& sim = ctx.config.sim;
  const ScaledUnits units = nondimensionalize(sim.transition, sim.lattice);
  const ScaledBeam beam = scale_beam(sim.beam, sim.lattice, units);

  Csv pdf(out, "mode_pdf.csv", {"configuration", "delta_Gamma0", "gamma_Gamma0", "mass", "density_per_Gamma0_sq"});
  Csv summary(out, "mode_pdf_summary.csv",
              {"configuration", "samples", "detuning_Gamma0", "max_bin_mass", "outside_mass",
               "mean_dominant_fraction", "least_squares_fallbacks"});
  for (const auto& c : cfgs) {
    const std::string name = c.get<std::string>();
    GeometryModel g = named_geometry(ctx, name, vsigma, spread);
    g.local_detuning = false;  // the mode picture needs uniform response
    const std::size_t n = ctx.samples_for(g);
    ctx.note(fmt::format("{}: {} sample(s)", name, n));

    struct Sample {
      ModeSet modes;
      ModeDecomposition dec;
    };
    std::vector<Sample> samples(n);
    parallel_for(n, ctx.threads, [&](std::size_t i) {
      const EnsembleSample s = draw_ensemble(sim.lattice, g, units, ctx.config.scan.seed, i);
      const Scene scene = make_scene(s, units, sim.transition.polarization_model);
      samples[i].modes = eigensystem(assemble(scene));
      samples[i].dec = decompose(samples[i].modes, drive_vector(scene, beam), delta);
    });
    ModeHistogramAccumulator acc(grid);
    double dominant = 0.0;
    std::size_t fallbacks = 0;
    for (const auto& s : samples) {
      acc.add(s.modes, s.dec);
      const double total = s.dec.amplitudes.sum();
      if (total > 0.0) dominant += s.dec.amplitudes.maxCoeff() / total;
      fallbacks += s.dec.least_squares_fallback ? 1 : 0;
    }
    const ModeHistogram h = acc.result();
    const double bin_area = (grid.delta_max - grid.delta_min) / grid.delta_bins *
                            (grid.gamma_max - grid.gamma_min) / grid.gamma_bins;
    double max_mass = 0.0;
    for (int i = 0; i < h.delta_bins; ++i)
      for (int j = 0; j < h.gamma_bins; ++j) {
        max_mass = std::max(max_mass, h.at(i, j));
        pdf.add(name).add(h.delta_center(i)).add(h.gamma_center(j)).add(h.at(i, j)).add(h.at(i, j) / bin_area);
        pdf.end_row();
      }
    summary.add(name).add(n).add(delta).add(max_mass).add(h.outside_mass).add(dominant / static_cast<double>(n));
    summary.add(fallbacks);
    summary.end_row();
  }
}

void intensity_map(const Context& ctx, OutputSet& out) {
  const auto waists = knob_numbers(ctx, "waists_a");
  for (double w : waists)
    if (!(w > 0.0)) knob_error(ctx, "waists_a", "waists must be > 0");
  const auto xs = knob_range(ctx, "x_a");
  const auto zs = knob_range(ctx, "z_a");
  const double excl = knob_number(ctx, "exclusion_radius_a");
  if (!(excl >= 0.0)) knob_error(ctx, "exclusion_radius_a", "must be >= 0");
  const int n_theta = static_cast<int>(knob_integer(ctx, "theta_points", 1));
  const int n_phi = static_cast<int>(knob_integer(ctx, "phi_points", 1));
  const auto& dk = ctx.sweep.at("detuning_Gamma0");

  const auto& sim = ctx.config.sim;
  const ScaledUnits units = nondimensionalize(sim.transition, sim.lattice);
  // One realization (sample index 0) of the configured geometry.
  const EnsembleSample sample = draw_ensemble(sim.lattice, sim.geometry, units, ctx.config.scan.seed, 0);
  const Scene scene = make_scene(sample, units, sim.transition.polarization_model);
  const CouplingMatrix matrix = assemble(scene);
  const double y_plane = grid_center(sim.lattice).y();

  Csv map(out, "intensity_map.csv",
          {"waist_a", "detuning_Gamma0", "x_a", "z_a", "total_intensity", "scattered_intensity"});
  Csv ang(out, "angular.csv",
          {"waist_a", "detuning_Gamma0", "theta_rad", "phi_rad", "dsigma_sc_per_sr", "dsigma_intf_per_sr"});
  Csv res(out, "resonance.csv", {"waist_a", "detuning_Gamma0", "source"});
  for (double w : waists) {
    SimulationConfig one = sim;
    one.beam.waist_a = w;
    double delta = 0.0;
    std::string source = "config";
    if (dk.is_null()) {
      Context single = ctx;
      single.config.scan.samples = 1;
      const SpectrumRun run = run_spectrum(single, one, fmt::format("w0 = {} a", w));
      if (!run.t_fit) throw NumericalError("could not locate the resonance for the intensity map");
      delta = run.t_fit->center;
      source = "fit";
    } else {
      delta = dk.get<double>();
    }
    res.add(w).add(delta).add(source);
    res.end_row();

    const ScaledBeam beam = scale_beam(one.beam, sim.lattice, units);
    const DipoleSolution sol = solve_steady_state(matrix, delta, drive_vector(scene, beam), sim.solver);
    std::vector<Vec3> points;
    points.reserve(xs.size() * zs.size());
    for (double z : zs)
      for (double x : xs) points.push_back(Vec3(x, y_plane, z) * units.ka);
    const auto field = near_field_intensity(sol, scene, beam, points, excl * units.ka);
    std::size_t k = 0;
    for (double z : zs)
      for (double x : xs) {
        const auto& p = field[k++];
        map.add(w).add(delta).add(x).add(z).add(p.total_intensity).add(p.scattered_intensity);
        map.end_row();
      }
    for (const auto& a : angular_distribution(sol, scene, beam, n_theta, n_phi)) {
      ang.add(w).add(delta).add(a.theta).add(a.phi).add(a.dsigma_sc).add(a.dsigma_intf);
      ang.end_row();
    }
  }
}

}  // namespace coopscat::scenario
