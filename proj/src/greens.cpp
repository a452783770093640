#include "coopscat/greens.hpp"

#include <cmath>

namespace coopscat {

namespace {

struct RadialTerms {
  cplx prefactor;  // (3/2) e^{ir} / r
  cplx diag;       // coefficient of I
  cplx dyad;       // coefficient of rhat rhat^T
};

RadialTerms radial_terms(double r) {
  if (!(r > 0.0)) throw DomainError("dyadic Green's function is singular at zero separation");
  const double inv = 1.0 / r;
  const double inv2 = inv * inv;
  RadialTerms t;
  t.prefactor = 1.5 * inv * cplx(std::cos(r), std::sin(r));
  t.diag = cplx(1.0 - inv2, inv);
  t.dyad = cplx(-1.0 + 3.0 * inv2, -3.0 * inv);
  return t;
}

}  // namespace

GreenTensor dyadic_green(const Vec3& r) {
  const double dist = r.norm();
  const auto t = radial_terms(dist);
  const Vec3 u = r / dist;
  GreenTensor g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = t.dyad * (u[i] * u[j]);
  for (int i = 0; i < 3; ++i) g(i, i) += t.diag;
  return t.prefactor * g;
}

cplx sigma_coupling(const Vec3& r) {
  const double dist = r.norm();
  const auto t = radial_terms(dist);
  // |e_sigma- . rhat|^2 = (rx^2 + ry^2) / (2 r^2)
  const double in_plane = 0.5 * (r.x() * r.x() + r.y() * r.y()) / (dist * dist);
  return t.prefactor * (t.diag + t.dyad * in_plane);
}

Eigen::Matrix3cd sigma_projector() {
  const CVec3 e = sigma_minus_vector();
  return e * e.adjoint();
}

PairResponse pair_response(const Vec3& separation) {
  const cplx g = sigma_coupling(separation);
  // Symmetric and antisymmetric combinations have eigenvalues +g and -g.
  PairResponse p;
  p.delta_sym = -0.5 * g.real();
  p.gamma_sym = 1.0 + g.imag();
  p.delta_anti = 0.5 * g.real();
  p.gamma_anti = 1.0 - g.imag();
  return p;
}

}  // namespace coopscat
