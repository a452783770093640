#pragma once

// Detuning scans averaged over disorder samples, and Lorentzian fits.

#include "coopscat/core.hpp"
#include "coopscat/flux.hpp"
#include "coopscat/geometry.hpp"
#include "coopscat/solver.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace coopscat {

/// Everything needed to run one detuning scan.
struct SimulationConfig {
  TransitionSpec transition{};
  LatticeSpec lattice{};
  BeamSpec beam{};
  DetectionSpec detection{};
  GeometryModel geometry{};
  SolveOptions solver{};
};

/// 31 points over [-2.5, 2.5] Gamma0.
std::vector<double> default_detuning_grid();

/// n evenly spaced points over [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct SpectrumResult {
  std::vector<double> detuning;  // Gamma0, strictly increasing
  std::vector<double> r_mean, r_sem;
  std::vector<double> t_mean, t_sem;
  std::vector<double> a_mean, a_sem;
  std::size_t n_samples = 0;      // samples that entered the averages
  std::size_t n_requested = 0;
  std::size_t failures = 0;
  std::vector<std::uint64_t> failed_seeds;
  std::uint64_t master_seed = 0;

  std::size_t size() const { return detuning.size(); }
};

struct ScanOptions {
  unsigned threads = 1;
  double max_failure_fraction = 0.01;
  /// Called after each finished sample with (done, total). May be empty.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Per-sample observables on the grid. Samples are drawn from
/// (master_seed, index) so any subset of indices or grid points reproduces
/// the same per-sample numbers. Deterministic geometries are evaluated once.
/// Throws NumericalError if more than max_failure_fraction of samples fail.
SpectrumResult scan(const SimulationConfig& config, std::span<const double> grid, std::size_t n_samples,
                    std::uint64_t master_seed, const ScanOptions& options = {});

/// Union of two scans over disjoint grids with the same samples.
SpectrumResult merge_spectra(const SpectrumResult& a, const SpectrumResult& b);

struct LorentzianFit {
  double amplitude = 0.0;  // A0; negative for a dip
  double center = 0.0;     // delta0, Gamma0
  double width = 0.0;      // full width Gamma, Gamma0
  double offset = 0.0;     // c
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // (A0, delta0, Gamma, c)
  double residual_norm = 0.0;  // sqrt(sum w r^2)
  double reduced_chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  bool width_at_grid_resolution = false;

  double amplitude_error() const { return std::sqrt(covariance(0, 0)); }
  double center_error() const { return std::sqrt(covariance(1, 1)); }
  double width_error() const { return std::sqrt(covariance(2, 2)); }
  double offset_error() const { return std::sqrt(covariance(3, 3)); }
  double operator()(double x) const;
};

struct FitOptions {
  bool fit_offset = true;
  int max_iterations = 500;
  double step_tolerance = 1e-9;
};

/// Weighted Levenberg-Marquardt fit of c + A0 (G/2)^2 / ((x - x0)^2 + (G/2)^2).
/// Empty `sigma` means unit weights; the covariance is then scaled by the
/// reduced chi^2. Throws DomainError for fewer than 5 points and
/// NumericalError when the iteration does not converge.
LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {},
                             const FitOptions& options = {});

enum class SpectrumChannel { reflectance, transmittance, absorptance };

/// Fits one channel of a spectrum using its standard errors as weights when
/// they are all positive, unit weights otherwise.
LorentzianFit fit_spectrum(const SpectrumResult& spectrum, SpectrumChannel channel, const FitOptions& options = {});

/// Second pass: `points` evenly spaced over center +- half_span.
std::vector<double> refinement_grid(double center, double half_span, std::size_t points,
                                    std::span<const double> existing);

struct ShiftPoint {
  double parameter = 0.0;
  double center = 0.0;
  double center_error = 0.0;
};

/// (parameter, fitted delta0, uncertainty) rows. Needs at least two fits.
std::vector<ShiftPoint> resonance_shift(std::span<const double> parameters, std::span<const LorentzianFit> fits);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
/// exception after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace coopscat
