#include "coopscat/geometry.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

using namespace coopscat;

namespace {

struct Moments {
  double mean = 0, sd = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.sd += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(m.sd / static_cast<double>(v.size() - 1));
  return m;
}

LatticeSpec small_lattice(int n) {
  LatticeSpec l;
  l.nx = n;
  l.ny = n;
  return l;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("ordered grid") {
  std::mt19937_64 rng(1);
  const auto t = build_traps(LatticeSpec{}, ConfigKind::ordered_2d, {}, rng);
  REQUIRE(t.sites.size() == 196);
  for (const auto& s : t.sites) {
    CHECK(s.x() == std::round(s.x()));
    CHECK(s.y() == std::round(s.y()));
    CHECK(s.z() == 0.0);
    CHECK(s.x() >= 0);
    CHECK(s.x() <= 13);
  }
}

TEST_CASE("reduced filling keeps an exact count of distinct sites") {
  const std::pair<double, std::size_t> cases[] = {{0.44, 86}, {0.69, 135}, {0.92, 180}, {1.0, 196}};
  for (auto [eta, count] : cases) {
    std::mt19937_64 rng(42);
    TrapParams p;
    p.filling = eta;
    const auto t = build_traps(LatticeSpec{}, ConfigKind::reduced_filling, p, rng);
    CHECK(t.sites.size() == count);
    std::set<std::pair<int, int>> seen;
    for (const auto& s : t.sites) seen.insert({static_cast<int>(s.x()), static_cast<int>(s.y())});
    CHECK(seen.size() == count);
  }
}

TEST_CASE("filling outside [0, 1] is rejected") {
  std::mt19937_64 rng(1);
  TrapParams p;
  p.filling = 1.2;
  CHECK_THROWS_AS(build_traps(LatticeSpec{}, ConfigKind::reduced_filling, p, rng), DomainError);
  p.filling = 0.0;
  CHECK_THROWS(build_traps(LatticeSpec{}, ConfigKind::reduced_filling, p, rng));
}

TEST_CASE("vertical disorder: integer planes with the requested spread") {
  std::mt19937_64 rng(9);
  TrapParams p;
  p.vertical_sigma = 10.0;
  std::vector<double> z;
  while (z.size() < 10000) {
    const auto t = build_traps(small_lattice(10), ConfigKind::vertical_disorder, p, rng);
    for (const auto& s : t.sites) {
      CHECK(s.z() == std::round(s.z()));
      z.push_back(s.z());
    }
  }
  const Moments m = moments(z);
  CHECK(std::abs(m.mean) < 0.5);
  CHECK(m.sd == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("pancake: uniform over the footprint") {
  std::mt19937_64 rng(4);
  TrapParams p;
  p.pancake_density = 0.5;
  const auto t = build_traps(LatticeSpec{}, ConfigKind::pancake_uniform, p, rng);
  CHECK(t.sites.size() == 98);
  for (const auto& s : t.sites) {
    CHECK(s.x() >= -0.5);
    CHECK(s.x() <= 13.5);
    CHECK(s.z() == 0.0);
  }
}

TEST_CASE("zero spread leaves trap centres untouched") {
  std::mt19937_64 rng(1);
  const auto t = build_traps(LatticeSpec{}, ConfigKind::ordered_2d, {}, rng);
  const auto s = sample_positions(t, {}, 99);
  for (std::size_t i = 0; i < t.sites.size(); ++i) CHECK(s.positions[i] == t.sites[i]);
}

TEST_CASE("gaussian spread moments") {
  TrapConfiguration t;
  t.sites.assign(100000, Vec3::Zero());
  SUBCASE("ground state, all axes") {
    const auto s = sample_positions(t, SpreadSpec::isotropic(0.054), 17);
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> v;
      for (const auto& p : s.positions) v.push_back(p[axis]);
      CHECK(moments(v).sd == doctest::Approx(0.054).epsilon(0.03));
    }
  }
  SUBCASE("heated vertical") {
    const auto s = sample_positions(t, {0.054, 0.054, 3 * 0.054}, 18);
    std::vector<double> v;
    for (const auto& p : s.positions) v.push_back(p.z());
    CHECK(moments(v).sd == doctest::Approx(0.162).epsilon(0.03));
  }
}

TEST_CASE("ground-state spread at 300 E_r") {
  // sigma = a / (sqrt(2) pi V^{1/4}) from the harmonic approximation
  CHECK(ground_state_spread(300) == doctest::Approx(0.054).epsilon(0.01));
}

TEST_CASE("same seed, same sample; different seeds, independent draws") {
  GeometryModel g;
  g.kind = ConfigKind::reduced_filling;
  g.traps.filling = 0.7;
  g.spread = SpreadSpec::isotropic(0.1);
  const auto u = nondimensionalize({}, {});
  const auto a = draw_ensemble(LatticeSpec{}, g, u, 5, 3);
  const auto b = draw_ensemble(LatticeSpec{}, g, u, 5, 3);
  REQUIRE(a.positions.size() == b.positions.size());
  for (std::size_t i = 0; i < a.positions.size(); ++i) CHECK(a.positions[i] == b.positions[i]);

  // chi-square on the sign pattern of x-displacements from two streams
  TrapConfiguration t;
  t.sites.assign(4000, Vec3::Zero());
  const auto s1 = sample_positions(t, SpreadSpec::isotropic(1), mix_seed(1, 1));
  const auto s2 = sample_positions(t, SpreadSpec::isotropic(1), mix_seed(1, 3));
  double table[2][2] = {};
  for (std::size_t i = 0; i < t.sites.size(); ++i)
    table[s1.positions[i].x() > 0][s2.positions[i].x() > 0] += 1;
  const double n = static_cast<double>(t.sites.size());
  double chi2 = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ri = table[i][0] + table[i][1], cj = table[0][j] + table[1][j];
      const double e = ri * cj / n;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  CHECK(chi2 < 10.83);  // 1 dof, p = 0.001
}

TEST_CASE("local detuning") {
  const LatticeSpec lat;
  const auto u = nondimensionalize({}, lat);
  SUBCASE("zero on site centres") {
    CHECK(local_detuning(Vec3(3, 7, 0), lat, u) == 0.0);
    CHECK(local_detuning(Vec3(-2, 0, 5), lat, u) == 0.0);
  }
  SUBCASE("hand evaluation at 0.054 a along z") {
    // E_r / h for 87Rb at 1064 nm: h / (2 m lambda^2)
    const double h = 6.62607015e-34, m = 86.909180527 * 1.66053906660e-27, lam = 1064e-9;
    const double er_hz = h / (2 * m * lam * lam);
    const double s = std::sin(kPi * 0.054);
    const double expected = -2.5 * 300 * er_hz * s * s / 6.06e6;
    CHECK(local_detuning(Vec3(0, 0, 0.054), lat, u) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(er_hz == doctest::Approx(2027.0).epsilon(0.01));
  }
  SUBCASE("never positive") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-3, 3);
    for (int i = 0; i < 1000; ++i) CHECK(local_detuning(Vec3(d(rng), d(rng), d(rng)), lat, u) <= 0.0);
  }
}

TEST_CASE("Bloch breathing distribution") {
  BlochSpec b;
  SUBCASE("normalized for all times") {
    for (double t = 0; t <= 2.0; t += 0.05) {
      b.time = t;
      CHECK(std::abs(bloch_site_distribution(b).total() - 1.0) < 1e-12);
    }
  }
  SUBCASE("refocused at integer periods") {
    for (double t : {0.0, 1.0, 2.0}) {
      b.time = t;
      const auto d = bloch_site_distribution(b);
      CHECK(d.at(0) == 1.0);
      CHECK(d.at(1) == 0.0);
      CHECK(breathing_argument(b) == 0.0);
    }
  }
  SUBCASE("half period: half width about zeta_max sites") {
    b.time = 0.5;
    const auto d = bloch_site_distribution(b);
    double m2 = 0;
    for (int n = d.n_min; n < d.n_min + static_cast<int>(d.probabilities.size()); ++n) m2 += n * n * d.at(n);
    // sum n^2 J_n(z)^2 = z^2 / 2
    CHECK(m2 == doctest::Approx(2.5 * 2.5 / 2).epsilon(1e-10));
    CHECK(d.at(0) == doctest::Approx(std::pow(std::cyl_bessel_j(0.0, 2.5), 2)));
    CHECK(d.at(-2) == doctest::Approx(d.at(2)));
  }
}

TEST_CASE("minimum separation guard") {
  GeometryModel g;
  g.kind = ConfigKind::pancake_uniform;
  g.traps.pancake_density = 4.0;
  g.min_separation_a = 0.05;
  const auto s = draw_ensemble(small_lattice(5), g, nondimensionalize({}, small_lattice(5)), 1, 0);
  for (std::size_t i = 0; i < s.positions.size(); ++i)
    for (std::size_t j = i + 1; j < s.positions.size(); ++j)
      CHECK((s.positions[i] - s.positions[j]).norm() >= 0.05);
}

}  // TEST_SUITE
