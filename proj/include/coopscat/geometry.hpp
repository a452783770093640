#pragma once

// Trap layouts and Monte Carlo ensemble draws. All coordinates here are in
// units of the lattice constant a; conversion to 1/k happens when a Scene
// is built for the solver.

#include "coopscat/core.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace coopscat {

enum class ConfigKind { ordered_2d, reduced_filling, vertical_disorder, pancake_uniform, bloch_breathing };

/// Wannier-Stark breathing parameters. zeta_max = 4J / Delta_z.
struct BlochSpec {
  double period_ms = 4.7;  // informational
  double zeta_max = 2.5;
  double time = 0.0;       // units of the Bloch period
};

struct SpreadSpec {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double sigma_z = 0.0;

  static SpreadSpec isotropic(double s) { return {s, s, s}; }
};

/// Parameters for build_traps. Fields irrelevant to the chosen kind are ignored.
struct TrapParams {
  double filling = 1.0;          // reduced_filling, vertical_disorder, bloch_breathing
  double vertical_sigma = 10.0;  // vertical_disorder, units of a
  double pancake_density = 1.0;  // pancake_uniform: atoms per a^2 of the footprint
  BlochSpec bloch{};
};

struct TrapConfiguration {
  std::vector<Vec3> sites;
  ConfigKind kind = ConfigKind::ordered_2d;
};

struct EnsembleSample {
  std::vector<Vec3> positions;
  std::vector<double> local_detunings;  // Gamma0
  std::uint64_t sample_seed = 0;
};

/// Full description of a disorder model: how traps are laid out and how
/// emitters are displaced inside them.
struct GeometryModel {
  ConfigKind kind = ConfigKind::ordered_2d;
  TrapParams traps{};
  SpreadSpec spread{};
  bool local_detuning = false;
  double min_separation_a = 1e-6;

  /// True if repeated draws can differ.
  bool is_random() const;
};

/// Deterministic per-sample generator: the stream depends only on
/// (master_seed, sample_index).
std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t stream);

/// Mixes two 64-bit values into a well-spread seed (SplitMix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

TrapConfiguration build_traps(const LatticeSpec& lattice, ConfigKind kind, const TrapParams& params,
                              std::mt19937_64& rng);

/// Displaces each trap centre by an independent Gaussian per axis.
/// Local detunings are left at zero; see apply_local_detunings.
EnsembleSample sample_positions(const TrapConfiguration& traps, const SpreadSpec& spread, std::uint64_t seed);

/// Transition shift (Gamma0) at a position (units of a) from the
/// anti-trapped excited state: delta_l = -2.5 V_g(r) / hbar.
double local_detuning(const Vec3& position_a, const LatticeSpec& lattice, const ScaledUnits& units);

void apply_local_detunings(EnsembleSample& sample, const LatticeSpec& lattice, const ScaledUnits& units);

/// Occupation probabilities of vertical sites n in [n_min, n_min + p.size()).
struct SiteDistribution {
  int n_min = 0;
  std::vector<double> probabilities;

  double at(int n) const;
  double total() const;
};

/// P_n(t) = J_n(zeta(t))^2 with zeta(t) = zeta_max |sin(pi t / T_B)|.
SiteDistribution bloch_site_distribution(const BlochSpec& bloch);

/// zeta(t) = zeta_max |sin(pi t / T_B)|, exactly zero at integer t.
double breathing_argument(const BlochSpec& bloch);

/// Draws one ensemble for a Monte Carlo index. Pairs closer than
/// min_separation are redrawn.
EnsembleSample draw_ensemble(const LatticeSpec& lattice, const GeometryModel& model, const ScaledUnits& units,
                             std::uint64_t master_seed, std::uint64_t sample_index);

/// Centre of the nx x ny site grid, units of a.
Vec3 grid_center(const LatticeSpec& lattice);

const char* to_string(ConfigKind kind);
ConfigKind config_kind_from_string(const std::string& name);

}  // namespace coopscat
