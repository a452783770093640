#include "coopscat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coopscat {

double breathing_argument(const BlochSpec& bloch) {
  // Reduce to one period first so integer times give exactly zero.
  const double frac = bloch.time - std::floor(bloch.time);
  return bloch.zeta_max * std::sin(kPi * frac);
}

namespace {

std::vector<Vec3> planar_grid(const LatticeSpec& lattice) {
  std::vector<Vec3> sites;
  sites.reserve(lattice.site_count());
  for (int iy = 0; iy < lattice.ny; ++iy)
    for (int ix = 0; ix < lattice.nx; ++ix) sites.emplace_back(ix, iy, 0.0);
  return sites;
}

// Keeps exactly round(filling * N) sites, chosen uniformly, in grid order.
std::vector<Vec3> thin_sites(const std::vector<Vec3>& sites, double filling, std::mt19937_64& rng) {
  if (!(filling >= 0.0 && filling <= 1.0)) throw DomainError("filling must lie in [0, 1]");
  const auto keep = static_cast<std::size_t>(std::llround(filling * static_cast<double>(sites.size())));
  if (keep == sites.size()) return sites;
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `keep` entries are a uniform subset.
  for (std::size_t i = 0; i < keep; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(keep);
  std::sort(order.begin(), order.end());
  std::vector<Vec3> kept;
  kept.reserve(keep);
  for (auto idx : order) kept.push_back(sites[idx]);
  return kept;
}

int sample_site(const SiteDistribution& dist, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng) * dist.total();
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    x -= dist.probabilities[i];
    if (x < 0.0) return dist.n_min + static_cast<int>(i);
  }
  return dist.n_min + static_cast<int>(dist.probabilities.size()) - 1;
}

Vec3 gaussian_offset(const SpreadSpec& spread, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 d = Vec3::Zero();
  // Each axis always consumes one draw so the streams stay aligned.
  const double gx = normal(rng), gy = normal(rng), gz = normal(rng);
  d.x() = spread.sigma_x * gx;
  d.y() = spread.sigma_y * gy;
  d.z() = spread.sigma_z * gz;
  return d;
}

}  // namespace

bool GeometryModel::is_random() const {
  if (spread.sigma_x > 0.0 || spread.sigma_y > 0.0 || spread.sigma_z > 0.0) return true;
  switch (kind) {
    case ConfigKind::ordered_2d: return false;
    case ConfigKind::reduced_filling: return traps.filling < 1.0;
    case ConfigKind::vertical_disorder: return true;
    case ConfigKind::pancake_uniform: return true;
    case ConfigKind::bloch_breathing: {
      const double zeta = breathing_argument(traps.bloch);
      return zeta > 0.0 || traps.filling < 1.0;
    }
  }
  return true;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(master_seed, stream));
}

TrapConfiguration build_traps(const LatticeSpec& lattice, ConfigKind kind, const TrapParams& params,
                              std::mt19937_64& rng) {
  lattice.validate();
  TrapConfiguration traps;
  traps.kind = kind;
  switch (kind) {
    case ConfigKind::ordered_2d:
      traps.sites = planar_grid(lattice);
      break;
    case ConfigKind::reduced_filling:
      traps.sites = thin_sites(planar_grid(lattice), params.filling, rng);
      break;
    case ConfigKind::vertical_disorder: {
      if (!(params.vertical_sigma > 0.0)) throw DomainError("vertical_sigma must be > 0");
      traps.sites = thin_sites(planar_grid(lattice), params.filling, rng);
      std::normal_distribution<double> normal(0.0, params.vertical_sigma);
      for (auto& s : traps.sites) s.z() = std::round(normal(rng));
      break;
    }
    case ConfigKind::pancake_uniform: {
      if (!(params.pancake_density > 0.0)) throw DomainError("pancake_density must be > 0");
      const auto count = static_cast<std::size_t>(
          std::llround(params.pancake_density * static_cast<double>(lattice.site_count())));
      std::uniform_real_distribution<double> ux(-0.5, lattice.nx - 0.5);
      std::uniform_real_distribution<double> uy(-0.5, lattice.ny - 0.5);
      traps.sites.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        traps.sites.emplace_back(x, y, 0.0);
      }
      break;
    }
    case ConfigKind::bloch_breathing: {
      if (!(params.bloch.zeta_max >= 0.0)) throw DomainError("zeta_max must be >= 0");
      traps.sites = thin_sites(planar_grid(lattice), params.filling, rng);
      const auto dist = bloch_site_distribution(params.bloch);
      for (auto& s : traps.sites) s.z() = sample_site(dist, rng);
      break;
    }
  }
  if (traps.sites.empty()) throw DomainError("trap configuration is empty");
  return traps;
}

EnsembleSample sample_positions(const TrapConfiguration& traps, const SpreadSpec& spread, std::uint64_t seed) {
  if (!(spread.sigma_x >= 0.0 && spread.sigma_y >= 0.0 && spread.sigma_z >= 0.0))
    throw DomainError("positional spreads must be >= 0");
  EnsembleSample sample;
  sample.sample_seed = seed;
  sample.positions = traps.sites;
  sample.local_detunings.assign(traps.sites.size(), 0.0);
  const bool any = spread.sigma_x > 0.0 || spread.sigma_y > 0.0 || spread.sigma_z > 0.0;
  if (!any) return sample;
  std::mt19937_64 rng(seed);
  for (auto& p : sample.positions) p += gaussian_offset(spread, rng);
  return sample;
}

double local_detuning(const Vec3& position_a, const LatticeSpec& lattice, const ScaledUnits& units) {
  double vg = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double frac = position_a[i] - std::round(position_a[i]);
    const double s = std::sin(kPi * frac);
    vg += lattice.depths_er[static_cast<std::size_t>(i)] * s * s;
  }
  // Excited state sees -1.5 V_g, so the transition shifts by -2.5 V_g.
  return -2.5 * vg * units.recoil_in_gamma0;
}

void apply_local_detunings(EnsembleSample& sample, const LatticeSpec& lattice, const ScaledUnits& units) {
  sample.local_detunings.resize(sample.positions.size());
  for (std::size_t i = 0; i < sample.positions.size(); ++i)
    sample.local_detunings[i] = local_detuning(sample.positions[i], lattice, units);
}

double SiteDistribution::at(int n) const {
  const int i = n - n_min;
  if (i < 0 || i >= static_cast<int>(probabilities.size())) return 0.0;
  return probabilities[static_cast<std::size_t>(i)];
}

double SiteDistribution::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

SiteDistribution bloch_site_distribution(const BlochSpec& bloch) {
  if (!(bloch.zeta_max >= 0.0)) throw DomainError("zeta_max must be >= 0");
  const double zeta = breathing_argument(bloch);
  // J_n(zeta) decays faster than geometrically once |n| exceeds zeta.
  const int n_max = static_cast<int>(std::ceil(zeta + 10.0 * std::cbrt(zeta) + 20.0));
  SiteDistribution dist;
  dist.n_min = -n_max;
  dist.probabilities.resize(static_cast<std::size_t>(2 * n_max + 1));
  for (int n = -n_max; n <= n_max; ++n) {
    const double j = std::cyl_bessel_j(static_cast<double>(std::abs(n)), zeta);
    dist.probabilities[static_cast<std::size_t>(n + n_max)] = j * j;
  }
  return dist;
}

EnsembleSample draw_ensemble(const LatticeSpec& lattice, const GeometryModel& model, const ScaledUnits& units,
                             std::uint64_t master_seed, std::uint64_t sample_index) {
  auto trap_rng = make_rng(master_seed, 2 * sample_index);
  const auto traps = build_traps(lattice, model.kind, model.traps, trap_rng);
  const std::uint64_t pos_seed = mix_seed(master_seed, 2 * sample_index + 1);
  auto sample = sample_positions(traps, model.spread, pos_seed);

  // Minimum-separation guard: redraw one member of any too-close pair.
  std::mt19937_64 redraw(mix_seed(pos_seed, 0x5eedULL));
  std::uniform_real_distribution<double> ux(-0.5, lattice.nx - 0.5);
  std::uniform_real_distribution<double> uy(-0.5, lattice.ny - 0.5);
  const double min2 = model.min_separation_a * model.min_separation_a;
  const std::size_t n = sample.positions.size();
  for (int attempt = 0;; ++attempt) {
    bool clean = true;
    for (std::size_t i = 0; i < n && clean; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((sample.positions[i] - sample.positions[j]).squaredNorm() >= min2) continue;
        clean = false;
        if (attempt > 1000) throw NumericalError("could not separate coincident emitters", pos_seed);
        if (model.kind == ConfigKind::pancake_uniform) {
          const double x = ux(redraw);
          const double y = uy(redraw);
          sample.positions[j] = Vec3(x, y, 0.0) + gaussian_offset(model.spread, redraw);
        } else {
          sample.positions[j] = traps.sites[j] + gaussian_offset(model.spread, redraw);
        }
        break;
      }
    if (clean) break;
  }

  if (model.local_detuning) apply_local_detunings(sample, lattice, units);
  return sample;
}

Vec3 grid_center(const LatticeSpec& lattice) {
  return Vec3(0.5 * (lattice.nx - 1), 0.5 * (lattice.ny - 1), 0.0);
}

const char* to_string(ConfigKind kind) {
  switch (kind) {
    case ConfigKind::ordered_2d: return "ordered_2d";
    case ConfigKind::reduced_filling: return "reduced_filling";
    case ConfigKind::vertical_disorder: return "vertical_disorder";
    case ConfigKind::pancake_uniform: return "pancake_uniform";
    case ConfigKind::bloch_breathing: return "bloch_breathing";
  }
  return "unknown";
}

ConfigKind config_kind_from_string(const std::string& name) {
  for (auto k : {ConfigKind::ordered_2d, ConfigKind::reduced_filling, ConfigKind::vertical_disorder,
                 ConfigKind::pancake_uniform, ConfigKind::bloch_breathing})
    if (name == to_string(k)) return k;
  throw DomainError("unknown geometry kind '" + name + "'");
}

}  // namespace coopscat
