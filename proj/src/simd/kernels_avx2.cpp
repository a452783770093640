// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless isa_available(avx2).

#include "coopscat/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace coopscat::simd::detail {

namespace {

// pi/2 split into 33-bit pieces so q * piece is exact for |q| < 2^20.
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624871116645580e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;

// Minimax coefficients on |r| <= pi/4 (Cephes sin.c).
constexpr double kS0 = 1.58962301576546568060e-10;
constexpr double kS1 = -2.50507477628578072866e-8;
constexpr double kS2 = 2.75573136213857245213e-6;
constexpr double kS3 = -1.98412698295895385996e-4;
constexpr double kS4 = 8.33333333332211858878e-3;
constexpr double kS5 = -1.66666666666666307295e-1;

constexpr double kC0 = -1.13585365213876817300e-11;
constexpr double kC1 = 2.08757008419747316778e-9;
constexpr double kC2 = -2.75573141792967388112e-7;
constexpr double kC3 = 2.48015872888517045348e-5;
constexpr double kC4 = -1.38888888888730564116e-3;
constexpr double kC5 = 4.16666666666665929218e-2;

inline void sincos4(__m256d x, __m256d& out_c, __m256d& out_s) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Hi), x);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Mid), r);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Lo), r);
  const __m256d r2 = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(kS0);
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kS1));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kS2));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kS3));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kS4));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kS5));
  const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(r, r2), ps, r);

  __m256d pc = _mm256_set1_pd(kC0);
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kC1));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kC2));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kC3));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kC4));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kC5));
  const __m256d r4 = _mm256_mul_pd(r2, r2);
  const __m256d cos_r =
      _mm256_fmadd_pd(r4, pc, _mm256_fnmadd_pd(_mm256_set1_pd(0.5), r2, _mm256_set1_pd(1.0)));

  // Quadrant k = q mod 4 selects and signs the reduced results.
  const __m256i k = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(k, one), one));
  const __m256d sin_neg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(k, two), two));
  const __m256d cos_neg =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(k, one), two), two));
  const __m256d sign = _mm256_set1_pd(-0.0);

  const __m256d s = _mm256_blendv_pd(sin_r, cos_r, swap);
  const __m256d c = _mm256_blendv_pd(cos_r, sin_r, swap);
  out_s = _mm256_xor_pd(s, _mm256_and_pd(sin_neg, sign));
  out_c = _mm256_xor_pd(c, _mm256_and_pd(cos_neg, sign));
}

void phase_sincos_avx2(const double* x, const double* y, const double* z, std::size_t n, double ux, double uy,
                       double uz, double* c, double* s) {
  const __m256d vx = _mm256_set1_pd(-ux);
  const __m256d vy = _mm256_set1_pd(-uy);
  const __m256d vz = _mm256_set1_pd(-uz);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d phase = _mm256_mul_pd(vx, _mm256_loadu_pd(x + i));
    phase = _mm256_fmadd_pd(vy, _mm256_loadu_pd(y + i), phase);
    phase = _mm256_fmadd_pd(vz, _mm256_loadu_pd(z + i), phase);
    __m256d vc, vs;
    sincos4(phase, vc, vs);
    _mm256_storeu_pd(c + i, vc);
    _mm256_storeu_pd(s + i, vs);
  }
  if (i < n) {
    alignas(32) double px[4] = {0, 0, 0, 0}, py[4] = {0, 0, 0, 0}, pz[4] = {0, 0, 0, 0};
    alignas(32) double oc[4], os[4];
    for (std::size_t j = 0; i + j < n; ++j) {
      px[j] = x[i + j];
      py[j] = y[i + j];
      pz[j] = z[i + j];
    }
    __m256d phase = _mm256_mul_pd(vx, _mm256_load_pd(px));
    phase = _mm256_fmadd_pd(vy, _mm256_load_pd(py), phase);
    phase = _mm256_fmadd_pd(vz, _mm256_load_pd(pz), phase);
    __m256d vc, vs;
    sincos4(phase, vc, vs);
    _mm256_store_pd(oc, vc);
    _mm256_store_pd(os, vs);
    for (std::size_t j = 0; i + j < n; ++j) {
      c[i + j] = oc[j];
      s[i + j] = os[j];
    }
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d sum = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(sum, _mm_unpackhi_pd(sum, sum)));
}

std::complex<double> cdot_avx2(const double* c, const double* s, const double* re, const double* im,
                               std::size_t n) {
  __m256d acc_re0 = _mm256_setzero_pd(), acc_im0 = _mm256_setzero_pd();
  __m256d acc_re1 = _mm256_setzero_pd(), acc_im1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d c0 = _mm256_loadu_pd(c + i), s0 = _mm256_loadu_pd(s + i);
    const __m256d r0 = _mm256_loadu_pd(re + i), m0 = _mm256_loadu_pd(im + i);
    const __m256d c1 = _mm256_loadu_pd(c + i + 4), s1 = _mm256_loadu_pd(s + i + 4);
    const __m256d r1 = _mm256_loadu_pd(re + i + 4), m1 = _mm256_loadu_pd(im + i + 4);
    acc_re0 = _mm256_fmadd_pd(r0, c0, acc_re0);
    acc_re0 = _mm256_fnmadd_pd(m0, s0, acc_re0);
    acc_im0 = _mm256_fmadd_pd(r0, s0, acc_im0);
    acc_im0 = _mm256_fmadd_pd(m0, c0, acc_im0);
    acc_re1 = _mm256_fmadd_pd(r1, c1, acc_re1);
    acc_re1 = _mm256_fnmadd_pd(m1, s1, acc_re1);
    acc_im1 = _mm256_fmadd_pd(r1, s1, acc_im1);
    acc_im1 = _mm256_fmadd_pd(m1, c1, acc_im1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d c0 = _mm256_loadu_pd(c + i), s0 = _mm256_loadu_pd(s + i);
    const __m256d r0 = _mm256_loadu_pd(re + i), m0 = _mm256_loadu_pd(im + i);
    acc_re0 = _mm256_fmadd_pd(r0, c0, acc_re0);
    acc_re0 = _mm256_fnmadd_pd(m0, s0, acc_re0);
    acc_im0 = _mm256_fmadd_pd(r0, s0, acc_im0);
    acc_im0 = _mm256_fmadd_pd(m0, c0, acc_im0);
  }
  double sum_re = hsum(_mm256_add_pd(acc_re0, acc_re1));
  double sum_im = hsum(_mm256_add_pd(acc_im0, acc_im1));
  for (; i < n; ++i) {
    sum_re += re[i] * c[i] - im[i] * s[i];
    sum_im += re[i] * s[i] + im[i] * c[i];
  }
  return {sum_re, sum_im};
}

void sincos_avx2(const double* phase, std::size_t n, double* c, double* s) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vc, vs;
    sincos4(_mm256_loadu_pd(phase + i), vc, vs);
    _mm256_storeu_pd(c + i, vc);
    _mm256_storeu_pd(s + i, vs);
  }
  if (i < n) {
    alignas(32) double p[4] = {0, 0, 0, 0}, oc[4], os[4];
    for (std::size_t j = 0; i + j < n; ++j) p[j] = phase[i + j];
    __m256d vc, vs;
    sincos4(_mm256_load_pd(p), vc, vs);
    _mm256_store_pd(oc, vc);
    _mm256_store_pd(os, vs);
    for (std::size_t j = 0; i + j < n; ++j) {
      c[i + j] = oc[j];
      s[i + j] = os[j];
    }
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, "avx2", &phase_sincos_avx2, &cdot_avx2, &sincos_avx2};
  return table;
}

}  // namespace coopscat::simd::detail
