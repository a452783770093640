#include "coopscat/core.hpp"

#include <cmath>

namespace coopscat {

namespace {

// CODATA exact / IUPAC values.
constexpr double kPlanck = 6.62607015e-34;           // J s
constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
constexpr double kRb87MassU = 86.909180527;

}  // namespace

void TransitionSpec::validate() const {
  if (!(gamma0_mhz > 0.0)) throw DomainError("transition.gamma0 must be > 0");
  if (!(wavelength_nm > 0.0)) throw DomainError("transition.wavelength must be > 0");
  if (!(alpha0 > 0.0)) throw DomainError("transition.alpha0 must be > 0");
}

void LatticeSpec::validate() const {
  if (!(spacing_over_lambda > 0.0)) throw DomainError("lattice.spacing must be > 0");
  if (nx < 1 || ny < 1) throw DomainError("lattice.nx and lattice.ny must be >= 1");
  for (double v : depths_er)
    if (!(v >= 0.0)) throw DomainError("lattice depths must be >= 0");
  if (!(lattice_wavelength_nm > 0.0)) throw DomainError("lattice.lattice_wavelength must be > 0");
}

void BeamSpec::validate() const {
  if (!(waist_a > 0.0)) throw DomainError("beam.waist must be > 0");
  if (std::abs(polarization.norm() - 1.0) > 1e-12) throw DomainError("beam.polarization must have unit norm");
}

void DetectionSpec::validate() const {
  if (!(numerical_aperture > 0.0 && numerical_aperture <= 1.0))
    throw DomainError("detection.numerical_aperture must lie in (0, 1]");
  if (quadrature.polar < 4 || quadrature.azimuth < 4 || quadrature.beam_polar < 4)
    throw DomainError("quadrature orders must be >= 4");
}

CVec3 sigma_minus_vector() {
  const double s = 1.0 / std::numbers::sqrt2;
  return CVec3(cplx(s, 0.0), cplx(0.0, -s), cplx(0.0, 0.0));
}

CVec3 sigma_plus_vector() {
  const double s = 1.0 / std::numbers::sqrt2;
  return CVec3(cplx(-s, 0.0), cplx(0.0, -s), cplx(0.0, 0.0));
}

ScaledUnits nondimensionalize(const TransitionSpec& transition, const LatticeSpec& lattice) {
  transition.validate();
  lattice.validate();
  ScaledUnits u;
  u.ka = kTwoPi * lattice.spacing_over_lambda;
  u.gamma0_mhz = transition.gamma0_mhz;
  u.wavelength_nm = transition.wavelength_nm;
  u.spacing_nm = lattice.spacing_over_lambda * transition.wavelength_nm;
  // E_r = h^2 / (2 m lambda_L^2), so E_r / h = h / (2 m lambda_L^2).
  const double mass = kRb87MassU * kAtomicMassUnit;
  const double lambda_l = lattice.lattice_wavelength_nm * 1e-9;
  u.recoil_hz = kPlanck / (2.0 * mass * lambda_l * lambda_l);
  u.recoil_in_gamma0 = u.recoil_hz / (transition.gamma0_mhz * 1e6);
  return u;
}

double ground_state_spread(double depth_er) {
  if (!(depth_er > 0.0)) throw DomainError("lattice depth must be > 0 for a ground-state spread");
  // Harmonic approximation: hbar*omega = 2 sqrt(V E_r), k_L = pi / a.
  return 1.0 / (std::numbers::sqrt2 * kPi * std::pow(depth_er, 0.25));
}

}  // namespace coopscat
