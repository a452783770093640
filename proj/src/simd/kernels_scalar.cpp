#include "coopscat/simd/kernels.hpp"

#include <cmath>

namespace coopscat::simd::detail {

namespace {

void phase_sincos_scalar(const double* x, const double* y, const double* z, std::size_t n, double ux, double uy,
                         double uz, double* c, double* s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = -(ux * x[i] + uy * y[i] + uz * z[i]);
    c[i] = std::cos(phase);
    s[i] = std::sin(phase);
  }
}

std::complex<double> cdot_scalar(const double* c, const double* s, const double* re, const double* im,
                                 std::size_t n) {
  double acc_re = 0.0;
  double acc_im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc_re += re[i] * c[i] - im[i] * s[i];
    acc_im += re[i] * s[i] + im[i] * c[i];
  }
  return {acc_re, acc_im};
}

void sincos_scalar(const double* phase, std::size_t n, double* c, double* s) {
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::cos(phase[i]);
    s[i] = std::sin(phase[i]);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, "scalar", &phase_sincos_scalar, &cdot_scalar, &sincos_scalar};
  return table;
}

}  // namespace coopscat::simd::detail
