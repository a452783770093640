#pragma once

// Inner loops of the far-field evaluation. For a fixed observation direction
// u the array factor is sum_i a_i exp(-i u . r_i); the phase factors are
// computed once per direction and then contracted against one amplitude
// vector per drive detuning.
//
// Every kernel has a scalar reference implementation. Vector variants are
// selected at runtime from what the CPU reports and are tested for
// equivalence against the reference.

#include <complex>
#include <cstddef>

namespace coopscat::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  /// c[i] + i s[i] = exp(-i (ux x[i] + uy y[i] + uz z[i]))
  void (*phase_sincos)(const double* x, const double* y, const double* z, std::size_t n, double ux, double uy,
                       double uz, double* c, double* s);

  /// sum_i (re[i] + i im[i]) (c[i] + i s[i])
  std::complex<double> (*cdot)(const double* c, const double* s, const double* re, const double* im,
                               std::size_t n);

  /// Fills c, s with cos and sin of the given phases.
  void (*sincos)(const double* phase, std::size_t n, double* c, double* s);
};

/// True if this build contains the variant and the CPU can run it.
bool isa_available(Isa isa);

/// Kernel table for a specific ISA; throws std::runtime_error if unavailable.
const KernelTable& kernels(Isa isa);

/// Best available table. Setting COOPSCAT_SIMD=scalar in the environment
/// forces the reference kernels.
const KernelTable& active_kernels();

const char* to_string(Isa isa);

namespace detail {
const KernelTable& scalar_table();
#if defined(COOPSCAT_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace coopscat::simd
