// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// COOPSCAT_ACCEPTANCE=3,5 restricts the run to the listed criteria.

#include "coopscat/eigenmodes.hpp"
#include "coopscat/flux.hpp"
#include "coopscat/greens.hpp"
#include "coopscat/scenarios.hpp"
#include "coopscat/spectro.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace coopscat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Row = std::map<std::string, std::string>;

std::vector<Row> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    Row r;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

double num(const Row& r, const std::string& col) { return std::stod(r.at(col)); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / fmt::format("coopscat_acceptance_{}_{}", ::getpid(), tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig base_config(const json& extra) {
  json doc = json::object();
  doc.merge_patch(extra);
  return parse_config(doc);
}

Manifest run_quiet(const std::string& scenario, const RunConfig& cfg, const fs::path& out, unsigned threads = 0) {
  RunOptions o;
  if (threads) o.threads = threads;
  return run_scenario(scenario, cfg, out, o);
}

ScaledBeam beam_for(const LatticeSpec& lat, double waist_a, const ScaledUnits& u) {
  BeamSpec b;
  b.waist_a = waist_a;
  return scale_beam(b, lat, u);
}

// 1. single dipole, both hemispheres at NA = 1
Outcome single_dipole() {
  LatticeSpec lat;
  lat.nx = 1;
  lat.ny = 1;
  const auto u = nondimensionalize({}, lat);
  GeometryModel g;
  const Scene s = make_scene(draw_ensemble(lat, g, u, 1, 0), u, PolarizationModel::sigma_minus);
  const auto sol = solve_steady_state(assemble(s), 0.0, drive_vector(s, beam_for(lat, 20, u)));
  DetectionSpec det;
  det.numerical_aperture = 1.0;
  const auto o = observables(sol, s, beam_for(lat, 20, u), det, array_footprint(lat, u));
  const double total = o.sigma_sc_forward + o.sigma_sc_backward;
  const double rel = std::abs(total / (6 * kPi) - 1);
  return {rel <= 1e-3, fmt::format("sigma_sc = {:.8f} (6 pi = {:.8f}), relative error {:.2e}", total, 6 * kPi, rel)};
}

// 2. A = R at NA = 1 over randomized configurations
Outcome energy_conservation() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const ConfigKind kinds[] = {ConfigKind::ordered_2d, ConfigKind::reduced_filling, ConfigKind::vertical_disorder,
                              ConfigKind::pancake_uniform, ConfigKind::bloch_breathing};
  double worst = 0.0;
  std::string worst_case;
  for (int i = 0; i < 20; ++i) {
    LatticeSpec lat;
    lat.nx = 4 + static_cast<int>(U(rng) * 5);
    lat.ny = 4 + static_cast<int>(U(rng) * 5);
    GeometryModel g;
    g.kind = kinds[i % 5];
    g.traps.filling = 0.4 + 0.6 * U(rng);
    g.traps.vertical_sigma = 1.0 + 9.0 * U(rng);
    g.traps.pancake_density = 0.4 + 0.6 * U(rng);
    g.traps.bloch.time = U(rng);
    g.spread = {0.15 * U(rng), 0.15 * U(rng), 0.15 * U(rng)};
    const auto model = i % 2 ? PolarizationModel::isotropic : PolarizationModel::sigma_minus;
    const auto u = nondimensionalize({}, lat);
    const ScaledBeam b = beam_for(lat, 3.0 + 17.0 * U(rng), u);
    const Scene s = make_scene(draw_ensemble(lat, g, u, 1000 + static_cast<std::uint64_t>(i), 0), u, model);
    if (s.positions.empty()) continue;
    const auto c = assemble(s);
    const double delta = -1.0 + 2.0 * U(rng);
    const std::vector<DipoleSolution> sols{solve_steady_state(c, delta, drive_vector(s, b))};
    DetectionSpec det;
    det.numerical_aperture = 1.0;
    const auto o = FluxEvaluator(b, det, array_footprint(lat, u)).evaluate(s, sols)[0];
    const double d = std::abs(o.absorptance - o.reflectance);
    if (d >= worst) {
      worst = d;
      worst_case = fmt::format("config {} ({} emitters, R = {:.5f})", i, s.positions.size(), o.reflectance);
    }
  }
  return {worst <= 1e-3, fmt::format("max |A - R| = {:.2e} at {}", worst, worst_case)};
}

// 3. 14x14 ordered array linewidth and reflectance
Outcome ordered_array() {
  auto run = [](double waist) {
    const RunConfig cfg = base_config(json{{"beam", {{"waist", {{"value", waist}, {"unit", "a"}}}}},
                                           {"sweeps", {{"geometry-compare", {{"configurations", {"ordered_2d"}}}}}}});
    const fs::path out = scratch(fmt::format("ordered_{}", waist));
    const auto m = run_quiet("geometry-compare", cfg, out);
    const auto rows = read_csv(m.directory / "summary.csv");
    fs::remove_all(out);
    return rows.at(0);
  };
  const Row wide = run(56.0), narrow = run(6.0);
  const double g = num(wide, "T_width_Gamma0"), r = num(wide, "R_peak"), r6 = num(narrow, "R_peak");
  const bool ok_g = std::abs(g - 0.56) <= 0.02, ok_r = std::abs(r - 0.95) <= 0.02, ok_r6 = r6 >= 0.99;
  return {ok_g && ok_r && ok_r6,
          fmt::format("w0 = 56a: Gamma = {:.4f} (want 0.56 +- 0.02: {}), R = {:.4f} (want 0.95 +- 0.02: {}); "
                      "w0 = 6a: R = {:.4f} (want >= 0.99: {})",
                      g, ok_g ? "ok" : "no", r, ok_r ? "ok" : "no", r6, ok_r6 ? "ok" : "no")};
}

// 4. eigenmode reconstruction and dominant mode vs fitted spectrum
Outcome eigenmode_reconstruction() {
  SimulationConfig sim;
  sim.beam.waist_a = 56;
  sim.detection.numerical_aperture = 1.0;
  const auto u = nondimensionalize(sim.transition, sim.lattice);
  const Scene s = make_scene(draw_ensemble(sim.lattice, sim.geometry, u, 1, 0), u, PolarizationModel::sigma_minus);
  const auto c = assemble(s);
  const auto modes = eigensystem(c);
  const auto e = drive_vector(s, scale_beam(sim.beam, sim.lattice, u));
  double worst = 0.0;
  const auto grid = default_detuning_grid();
  for (double d : grid) {
    const auto direct = solve_steady_state(c, d, e);
    const Eigen::VectorXcd rec = reconstruct(modes, decompose(modes, e, d));
    worst = std::max(worst, (rec - direct.amplitudes).norm() / direct.amplitudes.norm());
  }

  SpectrumResult spectrum = scan(sim, grid, 1, 1);
  const auto coarse = fit_spectrum(spectrum, SpectrumChannel::absorptance);
  spectrum = merge_spectra(spectrum, scan(sim, refinement_grid(coarse.center, 1.5 * coarse.width, 31, grid), 1, 1));
  const auto fit = fit_spectrum(spectrum, SpectrumChannel::absorptance);
  const auto dec = decompose(modes, e, fit.center);
  const auto q = static_cast<Eigen::Index>(dominant_mode(dec));
  const double dd = std::abs(modes.detunings[q] - fit.center), dg = std::abs(modes.linewidths[q] - fit.width);
  return {worst <= 1e-8 && dd <= 0.02 && dg <= 0.02,
          fmt::format("max relative reconstruction error {:.2e}; dominant mode (Delta, Gamma) = ({:.4f}, {:.4f}), "
                      "NA = 1 absorptance fit ({:.4f}, {:.4f}), differences ({:.4f}, {:.4f})",
                      worst, modes.detunings[q], modes.linewidths[q], fit.center, fit.width, dd, dg)};
}

// 5. two-emitter closed form vs 2x2 eigensystem
Outcome pair_oracle() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> len(0.2, 60.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec3 r(n(rng), n(rng), n(rng));
    r *= len(rng) / r.norm();
    Scene s;
    s.positions = {Vec3::Zero(), r};
    s.local_detunings = {0.0, 0.0};
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(assemble(s).green());
    std::vector<std::pair<double, double>> eig;
    for (int k = 0; k < 2; ++k) eig.push_back({-0.5 * es.eigenvalues()[k].real(), 1.0 + es.eigenvalues()[k].imag()});
    const auto p = pair_response(r);
    const std::pair<double, double> sym{p.delta_sym, p.gamma_sym}, anti{p.delta_anti, p.gamma_anti};
    auto dist = [](auto a, auto b) { return std::max(std::abs(a.first - b.first), std::abs(a.second - b.second)); };
    worst = std::max(worst, std::min(std::max(dist(sym, eig[0]), dist(anti, eig[1])),
                                     std::max(dist(sym, eig[1]), dist(anti, eig[0]))));
  }
  double far = 0.0;
  for (const Vec3& r : {Vec3(200 * kPi, 0, 0), Vec3(0, 0, 200 * kPi), Vec3(0, 200 * kPi, 0)}) {
    const auto p = pair_response(r);
    far = std::max({far, std::abs(p.delta_sym), std::abs(p.delta_anti), std::abs(p.gamma_sym - 1),
                    std::abs(p.gamma_anti - 1)});
  }
  return {worst <= 1e-10 && far <= 0.01,
          fmt::format("max deviation over 100 separations {:.2e}; at kr = 100*2pi max |shift|, |width - 1| = {:.2e}",
                      worst, far)};
}

// 6. linewidth band at high filling
Outcome filling_band() {
  const RunConfig cfg = base_config(json{
      {"scan", {{"samples", 200}}},
      {"sweeps", {{"filling-sweep", {{"fillings", {0.92}}, {"sigma_xy_a", 0.054}, {"sigma_z_a", {0.054, 0.097, 0.14}}}}}}});
  const fs::path out = scratch("filling");
  const auto m = run_quiet("filling-sweep", cfg, out);
  const auto rows = read_csv(m.directory / "summary.csv");
  fs::remove_all(out);
  double lo = 1e9, hi = -1e9;
  std::string widths;
  std::size_t samples = 0;
  for (const auto& r : rows) {
    const double w = num(r, "T_width_Gamma0");
    lo = std::min(lo, w);
    hi = std::max(hi, w);
    samples = std::max(samples, static_cast<std::size_t>(num(r, "samples")));
    widths += fmt::format("{}sigma_z = {}: {:.4f}", widths.empty() ? "" : ", ", r.at("sigma_z_a"), w);
  }
  const bool ok = rows.size() == 3 && samples == 200 && hi >= 0.60 && lo <= 0.75;
  return {ok, fmt::format("band [{:.4f}, {:.4f}] vs [0.60, 0.75] ({})", lo, hi, widths)};
}

// 7. strong vertical disorder
Outcome vertical_disorder() {
  const RunConfig cfg = base_config(json{
      {"scan", {{"samples", 200}}},
      {"sweeps", {{"geometry-compare", {{"configurations", {"vertical_disorder"}}, {"vertical_sigma_a", 10.0}}}}}});
  const fs::path out = scratch("vertical");
  const auto m = run_quiet("geometry-compare", cfg, out);
  const Row r = read_csv(m.directory / "summary.csv").at(0);
  fs::remove_all(out);
  const double g = num(r, "T_width_Gamma0"), rp = num(r, "R_peak");
  return {g >= 1.0 && g <= 1.4 && rp <= 0.2,
          fmt::format("Gamma = {:.4f} (want [1.0, 1.4]), R = {:.4f} (want <= 0.2), {} samples", g, rp,
                      r.at("samples"))};
}

// 8. breathing cycle
Outcome bloch_cycle() {
  const RunConfig cfg = base_config(json{{"scan", {{"samples", 50}}},
                                         {"sweeps", {{"bloch", {{"time_TB", {{"min", 0.0}, {"max", 2.0}, {"points", 9}}}}}}}});
  const fs::path out = scratch("bloch");
  const auto m = run_quiet("bloch", cfg, out);
  const auto rows = read_csv(m.directory / "bloch.csv");
  fs::remove_all(out);
  std::vector<double> t, r, w;
  for (const auto& row : rows) {
    t.push_back(num(row, "time_TB"));
    r.push_back(num(row, "R_peak"));
    w.push_back(num(row, "T_width_Gamma0"));
  }
  if (t.size() != 9) return {false, "expected 9 time points"};
  // revivals at indices 0, 4, 8 are local maxima of R
  const bool maxima = r[0] > r[1] && r[4] > r[3] && r[4] > r[5] && r[8] > r[7];
  std::size_t imin = 1;
  for (std::size_t i = 1; i < 4; ++i)
    if (r[i] < r[imin]) imin = i;
  const bool min_near_half = std::abs(t[imin] - 0.5) <= 0.25;
  const bool widths = w[imin] > 1.0 && w[0] < 1.0 && w[4] < 1.0 && w[8] < 1.0;
  std::string trace;
  for (std::size_t i = 0; i < t.size(); ++i)
    trace += fmt::format("{}t = {}: R = {:.3f}, Gamma = {:.3f}", i ? "; " : "", t[i], r[i], w[i]);
  return {maxima && min_near_half && widths,
          fmt::format("maxima at 0, 1, 2 T_B: {}; minimum at t = {} T_B; width > 1 at minimum and < 1 at revivals: "
                      "{} [{}]",
                      maxima ? "yes" : "no", t[imin], widths ? "yes" : "no", trace)};
}

// 9. byte-identical reruns (random geometries, different thread counts)
Outcome determinism() {
  const RunConfig cfg = base_config(json{
      {"lattice", {{"nx", 6}, {"ny", 6}}},
      {"beam", {{"waist", {{"value", 4}, {"unit", "a"}}}}},
      {"scan", {{"samples", 8}, {"seed", 31}}},
      {"sweeps",
       {{"geometry-compare", {{"configurations", {"ground_state_spread", "vertical_disorder", "pancake_uniform"}}}},
        {"spacing-sweep", {{"spacing_lambda", {{"min", 0.3}, {"max", 1.0}, {"points", 5}}}}}}}});
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const char* scenario : {"geometry-compare", "spacing-sweep"}) {
    const fs::path a = scratch(std::string("det_a_") + scenario), b = scratch(std::string("det_b_") + scenario);
    const auto ma = run_quiet(scenario, cfg, a, 1);
    const auto mb = run_quiet(scenario, cfg, b, 2);
    for (const auto& f : ma.files) {
      ++compared;
      if (slurp(ma.directory / f) != slurp(mb.directory / f)) differing.push_back(std::string(scenario) + "/" + f);
    }
    if (ma.files != mb.files) differing.push_back(std::string(scenario) + " file list");
    fs::remove_all(a);
    fs::remove_all(b);
  }
  std::string which;
  for (const auto& d : differing) which += " " + d;
  return {differing.empty() && compared > 0,
          fmt::format("{} files compared, {} differ{}", compared, differing.size(), which)};
}

// 10. Lorentzian fit recovery and coverage
Outcome fit_correctness() {
  auto lor = [](double x, double a0, double x0, double g, double c) {
    const double h = 0.5 * g;
    return c + a0 * h * h / ((x - x0) * (x - x0) + h * h);
  };
  const auto x = linear_grid(-2.5, 2.5, 41);
  std::vector<double> y;
  for (double v : x) y.push_back(lor(v, 0.77, 0.3, 0.68, 0.05));
  const auto f = fit_lorentzian(x, y);
  const double err = std::max({std::abs(f.amplitude - 0.77), std::abs(f.center - 0.3), std::abs(f.width - 0.68),
                               std::abs(f.offset - 0.05)});
  const std::vector<double> sig(x.size(), 0.01);
  int covered[4] = {0, 0, 0, 0};
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 7000);
    std::normal_distribution<double> noise(0, 0.01);
    std::vector<double> yn;
    for (double v : x) yn.push_back(lor(v, 0.77, 0.3, 0.68, 0.05) + noise(rng));
    const auto g = fit_lorentzian(x, yn, sig);
    covered[0] += std::abs(g.amplitude - 0.77) <= 3 * g.amplitude_error();
    covered[1] += std::abs(g.center - 0.3) <= 3 * g.center_error();
    covered[2] += std::abs(g.width - 0.68) <= 3 * g.width_error();
    covered[3] += std::abs(g.offset - 0.05) <= 3 * g.offset_error();
  }
  const int least = *std::min_element(std::begin(covered), std::end(covered));
  return {err <= 1e-6 && least >= 95,
          fmt::format("noiseless max parameter error {:.2e}; 3-sigma coverage (A0, delta0, Gamma, c) = "
                      "({}, {}, {}, {}) / 100",
                      err, covered[0], covered[1], covered[2], covered[3])};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // <= 0: no limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "single-dipole cross section", 1, single_dipole},
      {2, "energy conservation at NA = 1", 60, energy_conservation},
      {3, "14x14 ordered array", 120, ordered_array},
      {4, "eigenmode reconstruction", 60, eigenmode_reconstruction},
      {5, "two-dipole oracle", 10, pair_oracle},
      {6, "filling band", 900, filling_band},
      {7, "vertical disorder", 600, vertical_disorder},
      {8, "Bloch breathing", 600, bloch_cycle},
      {9, "determinism", 0, determinism},
      {10, "fit correctness", 30, fit_correctness},
  };
  std::set<int> only;
  if (const char* env = std::getenv("COOPSCAT_ACCEPTANCE")) {
    std::stringstream ss(env);
    std::string tok;
    while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
  }
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    const std::string budget = c.budget_s > 0 ? fmt::format(" < {:g} s", c.budget_s) : "";
    fmt::print("{} criterion {}: {} | {} | {:.1f} s{}{}\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, secs,
               budget, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
