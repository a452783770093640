#pragma once

// Far-field cross sections and detected observables. Cross sections are in
// units of 1/k^2 (a single resonant emitter scatters 6*pi = 3 lambda^2 / 2pi).
//
//   dsigma_sc/dOmega   = |F(u)|^2,  F(u) = (3/2) sum_i (p_i - u (u.p_i)) e^{-i u.r_i}
//   dsigma_intf/dOmega = -(3/2) w0^2 cos(t) exp(-(w0 sin t / 2)^2) Im[e_b^dagger S(u) e^{i u.f}]
//
// with t the angle from the beam axis, e_b the beam polarization, f the
// focus and S(u) = sum_i p_i e^{-i u.r_i}. The interference term vanishes
// outside the beam's forward hemisphere.

#include "coopscat/core.hpp"
#include "coopscat/geometry.hpp"
#include "coopscat/simd/kernels.hpp"
#include "coopscat/solver.hpp"

#include <functional>
#include <span>
#include <vector>

namespace coopscat {

enum class Hemisphere { plus_z, minus_z };

struct AngularNode {
  Vec3 direction;
  double weight = 0.0;  // includes sin(theta) d(theta) d(phi)
  double polar = 0.0;   // angle from the hemisphere axis
  double azimuth = 0.0;
};

/// Product rule on theta in [theta_lo, theta_hi] about the given axis:
/// Gauss-Legendre in theta, uniform in phi.
std::vector<AngularNode> panel_rule(double theta_lo, double theta_hi, Hemisphere hemisphere, int polar, int azimuth);

/// Product rule over the cap sin(theta) < na.
std::vector<AngularNode> cap_rule(double na, Hemisphere hemisphere, int polar, int azimuth);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct Integral {
  double value = 0.0;
  double error_estimate = 0.0;  // |I(order) - I(order/2)|
};

/// Integral of f over the cap sin(theta) < na around +z or -z.
Integral integrate_na(const std::function<double(const Vec3&)>& integrand, double na, Hemisphere hemisphere,
                      const QuadratureOrder& order = {});

/// F(u) as above; |F|^2 is the scattered differential cross section.
CVec3 scattered_far_field(const DipoleSolution& solution, const Scene& scene, const Vec3& direction);

double dsigma_scattered(const DipoleSolution& solution, const Scene& scene, const Vec3& direction);

double dsigma_interference(const DipoleSolution& solution, const Scene& scene, const ScaledBeam& beam,
                           const Vec3& direction);

/// Rectangle in the z = 0 plane (1/k units) over which incident power is counted.
struct Footprint {
  Vec3 center = Vec3::Zero();
  double width_x = 0.0;
  double width_y = 0.0;
};

/// nx*a by ny*a rectangle centred on the site grid.
Footprint array_footprint(const LatticeSpec& lattice, const ScaledUnits& units);

/// sigma_in = P_in / I0, the focal-plane intensity integrated over the footprint.
double incident_cross_section(const ScaledBeam& beam, const Footprint& footprint);

struct Observables {
  double reflectance = 0.0;
  double transmittance = 1.0;
  double absorptance = 0.0;
  double sigma_in = 0.0;
  double numerical_aperture = 0.0;
  double sigma_sc_backward = 0.0;  // within the NA cap
  double sigma_sc_forward = 0.0;
  double sigma_intf_forward = 0.0;
};

/// Precomputed angular rules for repeated evaluation over many solutions
/// of one beam / detection setup. Hot loop runs on the SIMD kernels.
class FluxEvaluator {
public:
  FluxEvaluator(const ScaledBeam& beam, const DetectionSpec& detection, const Footprint& footprint);
  /// Same, pinned to one kernel table (equivalence tests).
  FluxEvaluator(const ScaledBeam& beam, const DetectionSpec& detection, const Footprint& footprint,
                const simd::KernelTable& kernels);

  /// Observables for each solution; all solutions must belong to `scene`.
  std::vector<Observables> evaluate(const Scene& scene, std::span<const DipoleSolution> solutions) const;

  double sigma_in() const { return sigma_in_; }
  std::size_t node_count() const;

private:
  struct Node {
    AngularNode angular;
    bool with_interference;
    double interference_weight;  // -(3/2) w0^2 cos t exp(-(w0 sin t/2)^2) * quadrature weight
  };
  const simd::KernelTable* kernels_;
  ScaledBeam beam_;
  DetectionSpec detection_;
  double sigma_in_;
  std::vector<Node> forward_;
  std::vector<Node> backward_;
};

Observables observables(const DipoleSolution& solution, const Scene& scene, const ScaledBeam& beam,
                        const DetectionSpec& detection, const Footprint& footprint);

/// Total scattered cross section over the full sphere (both hemispheres, NA = 1).
double total_scattered_cross_section(const DipoleSolution& solution, const Scene& scene,
                                     const QuadratureOrder& order = {});

/// Extinction from the optical theorem, 6*pi sum_i Im[E0*(r_i) . p_i].
double extinction_cross_section(const DipoleSolution& solution, const Scene& scene, const ScaledBeam& beam);

struct NearFieldPoint {
  Vec3 position;               // 1/k units
  double total_intensity = 0;  // |E0 + E_sc|^2
  double scattered_intensity = 0;
  bool masked = false;
};

/// Full (near + far) field on arbitrary points. Points closer than
/// exclusion_radius (1/k units) to an emitter are masked with NaN values.
std::vector<NearFieldPoint> near_field_intensity(const DipoleSolution& solution, const Scene& scene,
                                                 const ScaledBeam& beam, const std::vector<Vec3>& points,
                                                 double exclusion_radius);

/// Scalar physical-optics mirror: the focal field truncated to a centred
/// square of side `side` (1/k units) is reflected; the transmitted field is
/// the incident field minus that patch (Babinet).
Observables mirror_reference(const ScaledBeam& beam, double side, const DetectionSpec& detection);

struct AngularSample {
  double theta = 0.0;
  double phi = 0.0;
  double dsigma_sc = 0.0;
  double dsigma_intf = 0.0;
};

/// dsigma/dOmega on a regular (theta, phi) grid over the full sphere.
std::vector<AngularSample> angular_distribution(const DipoleSolution& solution, const Scene& scene,
                                                const ScaledBeam& beam, int n_theta, int n_phi);

}  // namespace coopscat
