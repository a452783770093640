#pragma once

// Shared value types and the internal unit system.
//
// Internally every length is measured in 1/k (k = 2*pi/lambda), every rate
// and detuning in units of the natural linewidth Gamma0, and polarizabilities
// in units of the resonant polarizability alpha0. Dipole moments are stored
// as p = d / alpha0, which carries the units of the drive field (|E0| = 1 at
// the beam focus).

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopscat {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised when a physical input is outside its domain.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a linear solve or eigendecomposition is numerically unusable.
/// Carries the seed of the offending Monte Carlo draw when there is one.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what, std::uint64_t seed = 0)
      : std::runtime_error(what), seed_(seed) {}
  std::uint64_t seed() const noexcept { return seed_; }

private:
  std::uint64_t seed_;
};

enum class PolarizationModel { isotropic, sigma_minus };

enum class BeamDirection { plus_z, minus_z };

/// Two-level optical transition. Reporting units: gamma0 in 2*pi*MHz,
/// wavelength in nm.
struct TransitionSpec {
  double gamma0_mhz = 6.06;
  double wavelength_nm = 780.24;
  double alpha0 = 1.0;
  PolarizationModel polarization_model = PolarizationModel::sigma_minus;
  // Zeeman detuning of the sigma+ transition in Gamma0. Informational only,
  // the sigma+ and pi transitions are never part of the dynamics.
  double zeeman_detuning_sigma_plus = 1.0;

  void validate() const;
};

/// Square optical lattice holding the emitters.
struct LatticeSpec {
  double spacing_over_lambda = 0.68;  // a / lambda
  int nx = 14;
  int ny = 14;
  std::array<double, 3> depths_er{300.0, 300.0, 300.0};  // (Vx, Vy, Vz) in E_r
  double lattice_wavelength_nm = 1064.0;

  void validate() const;
  std::size_t site_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

/// Gaussian probe beam. Waist and focus are in units of the lattice
/// constant a; the focus defaults to the centre of the site grid.
struct BeamSpec {
  double waist_a = 56.0;
  BeamDirection direction = BeamDirection::plus_z;
  double detuning = 0.0;  // Gamma0
  CVec3 polarization = CVec3(cplx(1.0 / std::numbers::sqrt2, 0.0), cplx(0.0, -1.0 / std::numbers::sqrt2), cplx(0.0, 0.0));
  bool focus_at_array_center = true;
  Vec3 focus_a = Vec3::Zero();

  void validate() const;
};

/// Angular quadrature used for numerical-aperture integrals.
/// `polar` and `azimuth` cover the cap; `beam_polar` resolves the narrow
/// cone of the drive field's angular spectrum in the forward direction.
struct QuadratureOrder {
  int polar = 128;
  int azimuth = 256;
  int beam_polar = 32;
};

struct DetectionSpec {
  double numerical_aperture = 0.68;
  QuadratureOrder quadrature{};

  void validate() const;
};

/// Circular polarization vector (x - i y)/sqrt(2).
CVec3 sigma_minus_vector();
/// Circular polarization vector -(x + i y)/sqrt(2).
CVec3 sigma_plus_vector();

/// Conversion factors between reporting units and the internal units.
struct ScaledUnits {
  double ka = 0.0;                 // k * a, converts lengths in a to 1/k
  double gamma0_mhz = 0.0;         // Gamma0 / 2pi in MHz
  double wavelength_nm = 0.0;
  double spacing_nm = 0.0;
  double recoil_hz = 0.0;          // E_r / h of the trapping lattice
  double recoil_in_gamma0 = 0.0;   // (E_r / hbar) / Gamma0

  double a_to_k(double length_a) const { return length_a * ka; }
  double k_to_a(double length_k) const { return length_k / ka; }
  double nm_to_k(double length_nm) const { return length_nm * kTwoPi / wavelength_nm; }
  double k_to_nm(double length_k) const { return length_k * wavelength_nm / kTwoPi; }
  double mhz_to_gamma0(double f_mhz) const { return f_mhz / gamma0_mhz; }
  double gamma0_to_mhz(double rate) const { return rate * gamma0_mhz; }
  /// Cross sections come out in units of 1/k^2.
  double area_k_to_lambda2(double area) const { return area / (kTwoPi * kTwoPi); }
};

ScaledUnits nondimensionalize(const TransitionSpec& transition, const LatticeSpec& lattice);

/// RMS positional spread (units of a) of the motional ground state in a
/// sin^2 lattice of the given depth in recoil energies.
double ground_state_spread(double depth_er);

}  // namespace coopscat
