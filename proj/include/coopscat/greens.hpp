#pragma once

// Free-space dyadic Green's function in internal units (k = 1, alpha0 = 1):
//
//   alpha0 G(r) = (3/2) e^{ir}/r [ (1 + i/r - 1/r^2) I + (-1 - 3i/r + 3/r^2) rhat rhat^T ]
//
// so that Im[e^dagger alpha0 G(r) e] -> 1 as r -> 0 for any unit vector e.

#include "coopscat/core.hpp"

namespace coopscat {

using GreenTensor = Eigen::Matrix3cd;

/// alpha0 * G(r) for a separation r given in units of 1/k. Throws for r = 0.
GreenTensor dyadic_green(const Vec3& r);

/// Scalar coupling e_sigma-^dagger alpha0 G(r) e_sigma- without forming the tensor.
cplx sigma_coupling(const Vec3& r);

/// Rank-one projector onto the sigma- polarization, e e^dagger.
Eigen::Matrix3cd sigma_projector();

struct PairResponse {
  double delta_sym = 0.0;
  double gamma_sym = 1.0;
  double delta_anti = 0.0;
  double gamma_anti = 1.0;
};

/// Cooperative shift and width (Gamma0 units) of the symmetric and
/// antisymmetric sigma- modes of two emitters at separation r (1/k units).
PairResponse pair_response(const Vec3& separation);

}  // namespace coopscat
