#include "coopscat/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace coopscat::simd {

namespace {

bool cpu_has_avx2() {
#if defined(COOPSCAT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select_best() {
  if (const char* env = std::getenv("COOPSCAT_SIMD"); env != nullptr && std::string(env) == "scalar")
    return detail::scalar_table();
#if defined(COOPSCAT_HAVE_AVX2)
  if (cpu_has_avx2()) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error(std::string("SIMD variant not available: ") + to_string(isa));
  switch (isa) {
    case Isa::scalar: return detail::scalar_table();
    case Isa::avx2:
#if defined(COOPSCAT_HAVE_AVX2)
      return detail::avx2_table();
#else
      break;
#endif
  }
  return detail::scalar_table();
}

const KernelTable& active_kernels() {
  static const KernelTable& table = select_best();
  return table;
}

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace coopscat::simd
