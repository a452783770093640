#include "coopscat/spectro.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

namespace coopscat {

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> default_detuning_grid() { return linear_grid(-2.5, 2.5, 31); }

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!stop.load(std::memory_order_relaxed)) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) break;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

struct SampleResult {
  bool ok = false;
  std::uint64_t seed = 0;
  std::vector<double> r, t, a;
};

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("detuning grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw DomainError("detuning grid contains a non-finite value");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("detuning grid must be strictly increasing");
  }
}

void mean_and_sem(const std::vector<const std::vector<double>*>& rows, std::size_t j, double& mean, double& sem) {
  const double n = static_cast<double>(rows.size());
  double s = 0.0;
  for (const auto* r : rows) s += (*r)[j];
  mean = s / n;
  if (rows.size() < 2) {
    sem = 0.0;
    return;
  }
  double ss = 0.0;
  for (const auto* r : rows) ss += ((*r)[j] - mean) * ((*r)[j] - mean);
  sem = std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

SpectrumResult scan(const SimulationConfig& config, std::span<const double> grid, std::size_t n_samples,
                    std::uint64_t master_seed, const ScanOptions& options) {
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");
  check_grid(grid);
  config.transition.validate();
  config.lattice.validate();
  config.beam.validate();
  config.detection.validate();

  const ScaledUnits units = nondimensionalize(config.transition, config.lattice);
  const ScaledBeam beam = scale_beam(config.beam, config.lattice, units);
  const FluxEvaluator evaluator(beam, config.detection, array_footprint(config.lattice, units));
  const std::size_t n_eval = config.geometry.is_random() ? n_samples : 1;

  std::vector<SampleResult> results(n_eval);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(n_eval, options.threads, [&](std::size_t index) {
    SampleResult& out = results[index];
    const EnsembleSample sample = draw_ensemble(config.lattice, config.geometry, units, master_seed, index);
    out.seed = sample.sample_seed;
    try {
      const Scene scene = make_scene(sample, units, config.transition.polarization_model);
      const CouplingMatrix matrix = assemble(scene);
      const Eigen::VectorXcd drive = drive_vector(scene, beam);
      std::vector<DipoleSolution> solutions;
      solutions.reserve(grid.size());
      for (double delta : grid) solutions.push_back(solve_steady_state(matrix, delta, drive, config.solver));
      const auto obs = evaluator.evaluate(scene, solutions);
      out.r.resize(grid.size());
      out.t.resize(grid.size());
      out.a.resize(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) {
        out.r[j] = obs[j].reflectance;
        out.t[j] = obs[j].transmittance;
        out.a[j] = obs[j].absorptance;
      }
      out.ok = true;
    } catch (const NumericalError&) {
      out.ok = false;
    }
    const std::size_t finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, n_eval);
    }
  });

  SpectrumResult res;
  res.detuning.assign(grid.begin(), grid.end());
  res.master_seed = master_seed;
  res.n_requested = n_samples;

  // Ordered fold over sample index.
  std::vector<const std::vector<double>*> rr, tt, aa;
  for (const auto& s : results) {
    if (!s.ok) {
      ++res.failures;
      res.failed_seeds.push_back(s.seed);
      continue;
    }
    rr.push_back(&s.r);
    tt.push_back(&s.t);
    aa.push_back(&s.a);
  }
  if (static_cast<double>(res.failures) > options.max_failure_fraction * static_cast<double>(n_eval))
    throw NumericalError("too many pathological samples: " + std::to_string(res.failures) + " of " +
                             std::to_string(n_eval),
                         res.failed_seeds.front());
  res.n_samples = rr.size();
  const std::size_t m = grid.size();
  for (auto* v : {&res.r_mean, &res.r_sem, &res.t_mean, &res.t_sem, &res.a_mean, &res.a_sem}) v->resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    mean_and_sem(rr, j, res.r_mean[j], res.r_sem[j]);
    mean_and_sem(tt, j, res.t_mean[j], res.t_sem[j]);
    mean_and_sem(aa, j, res.a_mean[j], res.a_sem[j]);
  }
  return res;
}

SpectrumResult merge_spectra(const SpectrumResult& a, const SpectrumResult& b) {
  if (a.master_seed != b.master_seed || a.n_requested != b.n_requested)
    throw DomainError("spectra come from different sample sets");
  std::vector<std::pair<double, std::pair<const SpectrumResult*, std::size_t>>> rows;
  for (std::size_t i = 0; i < a.size(); ++i) rows.push_back({a.detuning[i], {&a, i}});
  for (std::size_t i = 0; i < b.size(); ++i) rows.push_back({b.detuning[i], {&b, i}});
  std::sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  SpectrumResult out;
  out.master_seed = a.master_seed;
  out.n_requested = a.n_requested;
  out.n_samples = std::min(a.n_samples, b.n_samples);
  out.failures = std::max(a.failures, b.failures);
  out.failed_seeds = a.failed_seeds.size() >= b.failed_seeds.size() ? a.failed_seeds : b.failed_seeds;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0 && !(rows[k].first > rows[k - 1].first)) throw DomainError("merged grids overlap");
    const auto& [src, i] = rows[k].second;
    out.detuning.push_back(src->detuning[i]);
    out.r_mean.push_back(src->r_mean[i]);
    out.r_sem.push_back(src->r_sem[i]);
    out.t_mean.push_back(src->t_mean[i]);
    out.t_sem.push_back(src->t_sem[i]);
    out.a_mean.push_back(src->a_mean[i]);
    out.a_sem.push_back(src->a_sem[i]);
  }
  return out;
}

std::vector<double> refinement_grid(double center, double half_span, std::size_t points,
                                    std::span<const double> existing) {
  std::vector<double> out;
  for (double x : linear_grid(center - half_span, center + half_span, points)) {
    const bool clash =
        std::any_of(existing.begin(), existing.end(), [&](double e) { return std::abs(e - x) < 1e-9; });
    if (!clash) out.push_back(x);
  }
  return out;
}

// ---- Lorentzian fit ----

double LorentzianFit::operator()(double x) const {
  const double h = 0.5 * width;
  const double d = x - center;
  return offset + amplitude * h * h / (d * d + h * h);
}

namespace {

using Params = Eigen::Vector4d;  // A0, x0, Gamma, c

double model(const Params& p, double x) {
  const double h = 0.5 * p[2];
  const double d = x - p[1];
  return p[3] + p[0] * h * h / (d * d + h * h);
}

void jacobian_row(const Params& p, double x, double* row) {
  const double h = 0.5 * p[2];
  const double d = x - p[1];
  const double den = d * d + h * h;
  const double l = h * h / den;
  row[0] = l;
  row[1] = p[0] * 2.0 * h * h * d / (den * den);
  row[2] = p[0] * h * d * d / (den * den);  // d/dGamma = (1/2) d/dh
  row[3] = 1.0;
}

Params initial_guess(std::span<const double> x, std::span<const double> y, bool fit_offset) {
  const std::size_t n = x.size();
  const double base = fit_offset ? 0.5 * (y[0] + y[n - 1]) : 0.0;
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(y[i] - base) > std::abs(y[k] - base)) k = i;
  const double amp = y[k] - base;
  const double half = 0.5 * std::abs(amp);
  auto crossing = [&](int dir) {
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(k);
    while (true) {
      const std::ptrdiff_t j = i + dir;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) return x[static_cast<std::size_t>(i)];
      const double dj = std::abs(y[static_cast<std::size_t>(j)] - base);
      if (dj < half) {
        const double di = std::abs(y[static_cast<std::size_t>(i)] - base);
        const double f = (di - half) / (di - dj);
        return x[static_cast<std::size_t>(i)] + f * (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(i)]);
      }
      i = j;
    }
  };
  double width = crossing(+1) - crossing(-1);
  double min_dx = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) min_dx = std::min(min_dx, x[i] - x[i - 1]);
  width = std::max(width, min_dx);
  return Params(amp, x[k], width, base);
}

}  // namespace

LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y, std::span<const double> sigma,
                             const FitOptions& options) {
  const std::size_t n = x.size();
  if (n < 5) throw DomainError("Lorentzian fit needs at least 5 points");
  if (y.size() != n || (!sigma.empty() && sigma.size() != n)) throw DomainError("fit inputs differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("fit inputs must be finite");
    if (i > 0 && !(x[i] > x[i - 1])) throw DomainError("fit abscissae must be strictly increasing");
    if (!sigma.empty() && !(sigma[i] > 0.0)) throw DomainError("fit errors must be positive");
  }
  const bool weighted = !sigma.empty();
  const int n_free = options.fit_offset ? 4 : 3;
  if (static_cast<int>(n) <= n_free) throw DomainError("too few points for the free parameters");

  std::vector<double> w(n, 1.0);
  if (weighted)
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (sigma[i] * sigma[i]);

  auto chi2_of = [&](const Params& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - model(p, x[i]);
      s += w[i] * r * r;
    }
    return s;
  };
  auto normal_equations = [&](const Params& p, Eigen::Matrix4d& jtj, Eigen::Vector4d& jtr) {
    jtj.setZero();
    jtr.setZero();
    double row[4];
    for (std::size_t i = 0; i < n; ++i) {
      jacobian_row(p, x[i], row);
      if (!options.fit_offset) row[3] = 0.0;
      const double r = y[i] - model(p, x[i]);
      for (int a = 0; a < 4; ++a) {
        jtr[a] += w[i] * row[a] * r;
        for (int b = 0; b < 4; ++b) jtj(a, b) += w[i] * row[a] * row[b];
      }
    }
    if (!options.fit_offset) jtj(3, 3) = 1.0;
  };

  Params p = initial_guess(x, y, options.fit_offset);
  double chi2 = chi2_of(p);
  double lambda = 1e-3;
  LorentzianFit fit;
  Eigen::Matrix4d jtj;
  Eigen::Vector4d jtr;
  int iter = 0;
  for (; iter < options.max_iterations && !fit.converged; ++iter) {
    normal_equations(p, jtj, jtr);
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix4d a = jtj;
      for (int k = 0; k < 4; ++k) a(k, k) *= 1.0 + lambda;
      const Eigen::Vector4d step = a.ldlt().solve(jtr);
      const Params trial = p + step;
      const double trial_chi2 = (trial[2] > 0.0 && step.allFinite()) ? chi2_of(trial) : HUGE_VAL;
      if (trial_chi2 <= chi2) {
        const double rel = step.norm() / (p.norm() + options.step_tolerance);
        p = trial;
        chi2 = trial_chi2;
        lambda = std::max(lambda * 0.1, 1e-15);
        accepted = true;
        if (rel < options.step_tolerance) fit.converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e20) {
          // No descent direction left: already at the minimum to rounding.
          fit.converged = true;
          break;
        }
      }
    }
  }
  if (!fit.converged) throw NumericalError("Lorentzian fit did not converge");

  fit.amplitude = p[0];
  fit.center = p[1];
  fit.width = p[2];
  fit.offset = options.fit_offset ? p[3] : 0.0;
  fit.iterations = iter;
  const double dof = static_cast<double>(static_cast<int>(n) - n_free);
  fit.reduced_chi2 = chi2 / dof;
  fit.residual_norm = std::sqrt(chi2);

  normal_equations(p, jtj, jtr);
  const int m = n_free;
  Eigen::MatrixXd cov = jtj.topLeftCorner(m, m).inverse();
  if (!weighted) cov *= fit.reduced_chi2;
  fit.covariance.topLeftCorner(m, m) = cov;

  double min_dx = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) min_dx = std::min(min_dx, x[i] - x[i - 1]);
  fit.width_at_grid_resolution = fit.width <= min_dx;
  return fit;
}

LorentzianFit fit_spectrum(const SpectrumResult& spectrum, SpectrumChannel channel, const FitOptions& options) {
  const std::vector<double>* mean = &spectrum.r_mean;
  const std::vector<double>* sem = &spectrum.r_sem;
  if (channel == SpectrumChannel::transmittance) {
    mean = &spectrum.t_mean;
    sem = &spectrum.t_sem;
  } else if (channel == SpectrumChannel::absorptance) {
    mean = &spectrum.a_mean;
    sem = &spectrum.a_sem;
  }
  const bool use_sem = std::all_of(sem->begin(), sem->end(), [](double s) { return s > 0.0; });
  return fit_lorentzian(spectrum.detuning, *mean, use_sem ? std::span<const double>(*sem) : std::span<const double>{},
                        options);
}

std::vector<ShiftPoint> resonance_shift(std::span<const double> parameters, std::span<const LorentzianFit> fits) {
  if (parameters.size() != fits.size()) throw DomainError("one fit per parameter value is required");
  if (fits.size() < 2) throw DomainError("resonance shift needs at least two spectra");
  std::vector<ShiftPoint> out;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].converged) throw NumericalError("resonance shift input fit did not converge");
    out.push_back({parameters[i], fits[i].center, fits[i].center_error()});
  }
  return out;
}

}  // namespace coopscat
