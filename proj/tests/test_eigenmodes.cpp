#include "coopscat/eigenmodes.hpp"
#include "coopscat/greens.hpp"
#include "coopscat/spectro.hpp"

#include "doctest.h"

#include <random>

using namespace coopscat;

namespace {

Scene array_scene(int n, double spacing_lambda, double spread = 0.0, std::uint64_t seed = 1) {
  LatticeSpec lat;
  lat.nx = n;
  lat.ny = n;
  lat.spacing_over_lambda = spacing_lambda;
  GeometryModel g;
  g.spread = SpreadSpec::isotropic(spread);
  const auto u = nondimensionalize({}, lat);
  return make_scene(draw_ensemble(lat, g, u, seed, 0), u, PolarizationModel::sigma_minus);
}

ScaledBeam centred_beam(int n, double spacing_lambda, double waist_a) {
  LatticeSpec lat;
  lat.nx = n;
  lat.ny = n;
  lat.spacing_over_lambda = spacing_lambda;
  BeamSpec b;
  b.waist_a = waist_a;
  return scale_beam(b, lat, nondimensionalize({}, lat));
}

}  // namespace

TEST_SUITE("eigenmodes") {

TEST_CASE("single uncoupled emitter") {
  Scene s;
  s.positions = {Vec3::Zero()};
  s.local_detunings = {0.0};
  const auto m = eigensystem(assemble(s));
  REQUIRE(m.size() == 1);
  CHECK(std::abs(m.eigenvalues[0]) == 0.0);
  CHECK(m.detunings[0] == 0.0);
  CHECK(m.linewidths[0] == 1.0);
}

TEST_CASE("two emitters: +-g as in the pair response") {
  const Vec3 r(3.3, 1.0, 0.2);
  Scene s;
  s.positions = {Vec3::Zero(), r};
  s.local_detunings = {0.0, 0.0};
  const auto m = eigensystem(assemble(s));
  const cplx g = sigma_coupling(r);
  const bool order = std::abs(m.eigenvalues[0] - g) < std::abs(m.eigenvalues[0] + g);
  CHECK(std::abs(m.eigenvalues[order ? 0 : 1] - g) < 1e-12);
  CHECK(std::abs(m.eigenvalues[order ? 1 : 0] + g) < 1e-12);
}

TEST_CASE("trace and passivity") {
  for (double spread : {0.0, 0.1}) {
    const auto m = eigensystem(assemble(array_scene(8, 0.68, spread, 3)));
    CHECK(std::abs(m.eigenvalues.sum()) < 1e-8);
    CHECK(std::abs(m.detunings.sum()) < 1e-8);
    CHECK(std::abs((m.linewidths.array() - 1.0).sum()) < 1e-8);
    CHECK(m.linewidths.minCoeff() > 0.0);
  }
}

TEST_CASE("eigenvectors are unit norm and satisfy G m = mu m") {
  const Scene s = array_scene(5, 0.68, 0.05, 2);
  const auto c = assemble(s);
  const auto m = eigensystem(c);
  for (Eigen::Index q = 0; q < m.modes.cols(); ++q) {
    CHECK(m.modes.col(q).norm() == doctest::Approx(1.0));
    CHECK((c.green() * m.modes.col(q) - m.eigenvalues[q] * m.modes.col(q)).norm() < 1e-10);
  }
}

TEST_CASE("reconstruction equals the direct solve across a scan") {
  for (double spread : {0.0, 0.08}) {
    const Scene s = array_scene(10, 0.68, spread, 4);
    const auto c = assemble(s);
    const auto modes = eigensystem(c);
    const auto e = drive_vector(s, centred_beam(10, 0.68, 30));
    for (double d : default_detuning_grid()) {
      const auto direct = solve_steady_state(c, d, e);
      const auto dec = decompose(modes, e, d);
      const Eigen::VectorXcd rec = reconstruct(modes, dec);
      CHECK((rec - direct.amplitudes).norm() / direct.amplitudes.norm() < 1e-8);
    }
  }
}

TEST_CASE("degenerate modes of a symmetric array still reconstruct") {
  // square symmetry produces exactly degenerate pairs
  const Scene s = array_scene(6, 0.5);
  const auto c = assemble(s);
  const auto modes = eigensystem(c);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(36);
  e[3] = 1.0;
  e[20] = cplx(0, 1);
  const auto dec = decompose(modes, e, 0.2);
  const auto direct = solve_steady_state(c, 0.2, e);
  CHECK((reconstruct(modes, dec) - direct.amplitudes).norm() / direct.amplitudes.norm() < 1e-8);
}

TEST_CASE("unity-filled array driven at normal incidence excites one mode") {
  const Scene s = array_scene(14, 0.68);
  const auto modes = eigensystem(assemble(s));
  const auto e = drive_vector(s, centred_beam(14, 0.68, 6));
  const std::size_t q0 = dominant_mode(decompose(modes, e, 0.0));
  const auto dec = decompose(modes, e, modes.detunings[static_cast<Eigen::Index>(q0)]);
  const std::size_t q = dominant_mode(dec);
  CHECK(dec.amplitudes[static_cast<Eigen::Index>(q)] / dec.amplitudes.sum() > 0.95);
  CHECK(modes.linewidths[static_cast<Eigen::Index>(q)] < 1.0);
}

TEST_CASE("histogram") {
  SUBCASE("single atom lands in the (0, 1) bin") {
    Scene s;
    s.positions = {Vec3::Zero()};
    s.local_detunings = {0.0};
    const auto m = eigensystem(assemble(s));
    Eigen::VectorXcd e(1);
    e << 1.0;
    ModeHistogramAccumulator acc;
    acc.add(m, decompose(m, e, 0.0));
    const auto h = acc.result();
    CHECK(h.total() == doctest::Approx(1.0));
    int bi = 0, bj = 0;
    double best = 0;
    for (int i = 0; i < h.delta_bins; ++i)
      for (int j = 0; j < h.gamma_bins; ++j)
        if (h.at(i, j) > best) {
          best = h.at(i, j);
          bi = i;
          bj = j;
        }
    CHECK(best == doctest::Approx(1.0));
    CHECK(std::abs(h.delta_center(bi)) <= 3.0 / 81);
    CHECK(std::abs(h.gamma_center(bj) - 1.0) <= 3.0 / 162 + 1e-12);
  }
  SUBCASE("unit mass over many samples, mass outside the grid accounted") {
    ModeHistogramAccumulator acc(HistogramGrid{21, 21, -1.0, 1.0, 0.0, 2.0});
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Scene s = array_scene(5, 0.4, 0.2, seed);
      const auto m = eigensystem(assemble(s));
      acc.add(m, decompose(m, drive_vector(s, centred_beam(5, 0.4, 20)), 0.0));
    }
    const auto h = acc.result();
    CHECK(acc.count() == 4);
    CHECK(h.total() == doctest::Approx(1.0));
    CHECK(h.outside_mass >= 0.0);
  }
  SUBCASE("empty input is rejected") { CHECK_THROWS(mode_amplitude_histogram({})); }
}

TEST_CASE("local detunings are refused") {
  Scene s;
  s.positions = {Vec3::Zero(), Vec3(2, 0, 0)};
  s.local_detunings = {0.0, -0.1};
  CHECK_THROWS_AS(eigensystem(assemble(s)), DomainError);
}

}  // TEST_SUITE
