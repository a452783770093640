#include "coopscat/flux.hpp"
#include "coopscat/simd/kernels.hpp"

#include "doctest.h"

#include <random>

using namespace coopscat;

namespace {

std::vector<simd::Isa> vector_isas() {
  std::vector<simd::Isa> out;
  if (simd::isa_available(simd::Isa::avx2)) out.push_back(simd::Isa::avx2);
  return out;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("scalar table is always present and env override is honoured") {
  CHECK(simd::isa_available(simd::Isa::scalar));
  CHECK(std::string(simd::kernels(simd::Isa::scalar).name) == "scalar");
  const char* env = std::getenv("COOPSCAT_SIMD");
  if (env && std::string(env) == "scalar") CHECK(simd::active_kernels().isa == simd::Isa::scalar);
}

TEST_CASE("vector kernels match the reference on awkward lengths") {
  const auto& ref = simd::kernels(simd::Isa::scalar);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(-300, 300), amp(-2, 2);
  for (auto isa : vector_isas()) {
    const auto& k = simd::kernels(isa);
    CAPTURE(k.name);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 13u, 196u, 401u}) {
      std::vector<double> x(n), y(n), z(n), re(n), im(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = pos(rng);
        y[i] = pos(rng);
        z[i] = pos(rng) * 0.1;
        re[i] = amp(rng);
        im[i] = amp(rng);
      }
      const double ux = 0.3, uy = -0.5, uz = std::sqrt(1 - 0.34);
      std::vector<double> c0(n), s0(n), c1(n), s1(n);
      ref.phase_sincos(x.data(), y.data(), z.data(), n, ux, uy, uz, c0.data(), s0.data());
      k.phase_sincos(x.data(), y.data(), z.data(), n, ux, uy, uz, c1.data(), s1.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(c0[i] - c1[i]) < 1e-13);
        CHECK(std::abs(s0[i] - s1[i]) < 1e-13);
      }
      const auto d0 = ref.cdot(c0.data(), s0.data(), re.data(), im.data(), n);
      const auto d1 = k.cdot(c0.data(), s0.data(), re.data(), im.data(), n);
      CHECK(std::abs(d0 - d1) <= 1e-13 * (1.0 + static_cast<double>(n)));

      std::vector<double> ph(n);
      for (std::size_t i = 0; i < n; ++i) ph[i] = pos(rng) * 10;
      ref.sincos(ph.data(), n, c0.data(), s0.data());
      k.sincos(ph.data(), n, c1.data(), s1.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(c0[i] - c1[i]) < 1e-13);
        CHECK(std::abs(s0[i] - s1[i]) < 1e-13);
      }
    }
  }
}

TEST_CASE("reference kernels against std::sin and std::cos") {
  const auto& ref = simd::kernels(simd::Isa::scalar);
  const std::vector<double> x{0.0, 1.0, -2.5}, y{0.0, 2.0, 1.0}, z{0.0, -1.0, 4.0};
  std::vector<double> c(3), s(3);
  ref.phase_sincos(x.data(), y.data(), z.data(), 3, 0.6, 0.0, 0.8, c.data(), s.data());
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = 0.6 * x[i] + 0.8 * z[i];
    CHECK(c[i] == doctest::Approx(std::cos(p)));
    CHECK(s[i] == doctest::Approx(-std::sin(p)));
  }
}

TEST_CASE("observables agree between kernel tables") {
  LatticeSpec lat;
  lat.nx = 9;
  lat.ny = 9;
  GeometryModel g;
  g.kind = ConfigKind::vertical_disorder;
  g.traps.vertical_sigma = 2;
  g.spread = SpreadSpec::isotropic(0.05);
  const auto u = nondimensionalize({}, lat);
  BeamSpec bs;
  bs.waist_a = 8;
  const ScaledBeam b = scale_beam(bs, lat, u);
  for (auto model : {PolarizationModel::sigma_minus, PolarizationModel::isotropic}) {
    const Scene s = make_scene(draw_ensemble(lat, g, u, 3, 0), u, model);
    const auto c = assemble(s);
    std::vector<DipoleSolution> sols;
    for (double d : {-0.5, 0.0, 0.3}) sols.push_back(solve_steady_state(c, d, drive_vector(s, b)));
    const FluxEvaluator ref(b, DetectionSpec{}, array_footprint(lat, u), simd::kernels(simd::Isa::scalar));
    const auto r0 = ref.evaluate(s, sols);
    for (auto isa : vector_isas()) {
      const FluxEvaluator vec(b, DetectionSpec{}, array_footprint(lat, u), simd::kernels(isa));
      const auto r1 = vec.evaluate(s, sols);
      for (std::size_t i = 0; i < sols.size(); ++i) {
        CHECK(std::abs(r0[i].reflectance - r1[i].reflectance) < 1e-11);
        CHECK(std::abs(r0[i].absorptance - r1[i].absorptance) < 1e-11);
      }
    }
  }
}

}  // TEST_SUITE
