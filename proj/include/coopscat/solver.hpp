#pragma once

// Steady-state coupled-dipole equations
//
//   (1/alpha_l(delta)) p_l - P sum_{j != l} alpha0 G(r_lj) p_j = P E0(r_l)
//
// in internal units. In the sigma- model every dipole is p_l = a_l e_sigma-
// and the unknowns are the scalar amplitudes a_l; in the isotropic model the
// unknowns are full 3-vectors (P = identity).

#include "coopscat/core.hpp"
#include "coopscat/geometry.hpp"

#include <cstdint>
#include <vector>

namespace coopscat {

/// Emitter positions in 1/k units with their local detunings.
struct Scene {
  std::vector<Vec3> positions;
  std::vector<double> local_detunings;
  PolarizationModel model = PolarizationModel::sigma_minus;
  std::uint64_t seed = 0;

  std::size_t size() const { return positions.size(); }
  bool uniform_response() const;
};

Scene make_scene(const EnsembleSample& sample, const ScaledUnits& units, PolarizationModel model);

/// Beam in internal units: waist and focus in 1/k.
struct ScaledBeam {
  double waist = 1.0;
  double direction = 1.0;  // +1 for plus_z, -1 for minus_z
  CVec3 polarization = sigma_minus_vector();
  Vec3 focus = Vec3::Zero();

  double rayleigh_range() const { return 0.5 * waist * waist; }
};

ScaledBeam scale_beam(const BeamSpec& beam, const LatticeSpec& lattice, const ScaledUnits& units);

/// alpha(delta) / alpha0 = -(1/2) / ((delta - delta_l) + i/2).
cplx polarizability(double delta, double local_detuning = 0.0);

/// Paraxial Gaussian beam, unit amplitude at the focus.
CVec3 drive_field(const ScaledBeam& beam, const Vec3& r);

/// Drive projected onto the model's unknowns: e^dagger E0(r_l) per emitter
/// (sigma- model) or the stacked 3-vectors (isotropic model).
Eigen::VectorXcd drive_vector(const Scene& scene, const ScaledBeam& beam);

/// Detuning-independent interaction part plus the per-emitter diagonal.
class CouplingMatrix {
public:
  explicit CouplingMatrix(const Scene& scene);

  std::size_t dimension() const { return static_cast<std::size_t>(green_.rows()); }
  std::size_t block_size() const { return model_ == PolarizationModel::sigma_minus ? 1 : 3; }
  PolarizationModel model() const { return model_; }
  std::uint64_t seed() const { return seed_; }

  /// Off-diagonal Green blocks; zero on the diagonal blocks.
  const Eigen::MatrixXcd& green() const { return green_; }
  const std::vector<double>& local_detunings() const { return local_detunings_; }
  bool uniform_response() const;

  /// Full system matrix at drive detuning delta.
  Eigen::MatrixXcd at(double delta) const;

private:
  Eigen::MatrixXcd green_;
  std::vector<double> local_detunings_;
  PolarizationModel model_;
  std::uint64_t seed_;
};

CouplingMatrix assemble(const Scene& scene);

struct DipoleSolution {
  Eigen::VectorXcd amplitudes;  // sigma- amplitudes (N) or stacked vectors (3N)
  PolarizationModel model = PolarizationModel::sigma_minus;
  double delta = 0.0;

  std::size_t emitter_count() const;
  /// Dipole vector p_l = d_l / alpha0.
  CVec3 moment(std::size_t l) const;
};

struct SolveOptions {
  double min_rcond = 1e-13;
};

/// Dense LU solve of M(delta) p = E. Throws NumericalError when the
/// reciprocal condition estimate falls below options.min_rcond.
DipoleSolution solve_steady_state(const CouplingMatrix& matrix, double delta, const Eigen::VectorXcd& drive,
                                  const SolveOptions& options = {});

/// Several drive vectors at the same detuning share one factorization.
std::vector<DipoleSolution> solve_steady_state(const CouplingMatrix& matrix, double delta,
                                               const std::vector<Eigen::VectorXcd>& drives,
                                               const SolveOptions& options = {});

/// Relative residual ||M p - E|| / ||E|| (0 when E = 0 and p = 0).
double relative_residual(const CouplingMatrix& matrix, const DipoleSolution& solution, const Eigen::VectorXcd& drive);

}  // namespace coopscat
