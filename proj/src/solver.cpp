#include "coopscat/solver.hpp"

#include "coopscat/greens.hpp"

#include <cmath>
#include <string>

namespace coopscat {

bool Scene::uniform_response() const {
  for (double d : local_detunings)
    if (d != 0.0) return false;
  return true;
}

Scene make_scene(const EnsembleSample& sample, const ScaledUnits& units, PolarizationModel model) {
  Scene scene;
  scene.positions.reserve(sample.positions.size());
  for (const auto& p : sample.positions) scene.positions.push_back(p * units.ka);
  scene.local_detunings = sample.local_detunings;
  scene.local_detunings.resize(scene.positions.size(), 0.0);
  scene.model = model;
  scene.seed = sample.sample_seed;
  return scene;
}

ScaledBeam scale_beam(const BeamSpec& beam, const LatticeSpec& lattice, const ScaledUnits& units) {
  beam.validate();
  ScaledBeam b;
  b.waist = units.a_to_k(beam.waist_a);
  b.direction = beam.direction == BeamDirection::plus_z ? 1.0 : -1.0;
  b.polarization = beam.polarization;
  const Vec3 focus_a = beam.focus_at_array_center ? grid_center(lattice) : beam.focus_a;
  b.focus = focus_a * units.ka;
  return b;
}

cplx polarizability(double delta, double local_detuning) {
  return -0.5 / cplx(delta - local_detuning, 0.5);
}

CVec3 drive_field(const ScaledBeam& beam, const Vec3& r) {
  const Vec3 d = r - beam.focus;
  const double z = beam.direction * d.z();
  const double rho2 = d.x() * d.x() + d.y() * d.y();
  const double zr = beam.rayleigh_range();
  const double ratio = z / zr;
  const double w2 = beam.waist * beam.waist * (1.0 + ratio * ratio);
  const double amp = std::sqrt(beam.waist * beam.waist / w2) * std::exp(-rho2 / w2);
  // k rho^2 / (2 R(z)) with 1/R = z / (z^2 + zr^2); finite at z = 0.
  const double curvature = 0.5 * rho2 * z / (z * z + zr * zr);
  const double phase = z + curvature - std::atan(ratio);
  return beam.polarization * (amp * cplx(std::cos(phase), std::sin(phase)));
}

Eigen::VectorXcd drive_vector(const Scene& scene, const ScaledBeam& beam) {
  const std::size_t n = scene.size();
  if (scene.model == PolarizationModel::sigma_minus) {
    const CVec3 e = sigma_minus_vector();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (std::size_t l = 0; l < n; ++l) v[static_cast<Eigen::Index>(l)] = e.dot(drive_field(beam, scene.positions[l]));
    return v;
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(3 * n));
  for (std::size_t l = 0; l < n; ++l) v.segment<3>(static_cast<Eigen::Index>(3 * l)) = drive_field(beam, scene.positions[l]);
  return v;
}

CouplingMatrix::CouplingMatrix(const Scene& scene)
    : local_detunings_(scene.local_detunings), model_(scene.model), seed_(scene.seed) {
  const auto n = static_cast<Eigen::Index>(scene.size());
  local_detunings_.resize(scene.size(), 0.0);
  if (model_ == PolarizationModel::sigma_minus) {
    green_ = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index j = l + 1; j < n; ++j) {
        const cplx g = sigma_coupling(scene.positions[static_cast<std::size_t>(l)] -
                                      scene.positions[static_cast<std::size_t>(j)]);
        green_(l, j) = g;
        green_(j, l) = g;
      }
    return;
  }
  green_ = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index j = l + 1; j < n; ++j) {
      const GreenTensor g = dyadic_green(scene.positions[static_cast<std::size_t>(l)] -
                                         scene.positions[static_cast<std::size_t>(j)]);
      green_.block<3, 3>(3 * l, 3 * j) = g;
      green_.block<3, 3>(3 * j, 3 * l) = g.transpose();
    }
}

bool CouplingMatrix::uniform_response() const {
  for (double d : local_detunings_)
    if (d != 0.0) return false;
  return true;
}

Eigen::MatrixXcd CouplingMatrix::at(double delta) const {
  Eigen::MatrixXcd m = -green_;
  const std::size_t bs = block_size();
  for (std::size_t l = 0; l < local_detunings_.size(); ++l) {
    const cplx inv_alpha = 1.0 / polarizability(delta, local_detunings_[l]);
    for (std::size_t c = 0; c < bs; ++c) {
      const auto i = static_cast<Eigen::Index>(bs * l + c);
      m(i, i) += inv_alpha;
    }
  }
  return m;
}

CouplingMatrix assemble(const Scene& scene) { return CouplingMatrix(scene); }

std::size_t DipoleSolution::emitter_count() const {
  const auto n = static_cast<std::size_t>(amplitudes.size());
  return model == PolarizationModel::sigma_minus ? n : n / 3;
}

CVec3 DipoleSolution::moment(std::size_t l) const {
  if (model == PolarizationModel::sigma_minus) return sigma_minus_vector() * amplitudes[static_cast<Eigen::Index>(l)];
  return amplitudes.segment<3>(static_cast<Eigen::Index>(3 * l));
}

std::vector<DipoleSolution> solve_steady_state(const CouplingMatrix& matrix, double delta,
                                               const std::vector<Eigen::VectorXcd>& drives,
                                               const SolveOptions& options) {
  const Eigen::MatrixXcd m = matrix.at(delta);
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond >= options.min_rcond) || !std::isfinite(rcond))
    throw NumericalError("coupling matrix is ill-conditioned (rcond=" + std::to_string(rcond) +
                             ", seed=" + std::to_string(matrix.seed()) + ")",
                         matrix.seed());
  std::vector<DipoleSolution> out;
  out.reserve(drives.size());
  for (const auto& e : drives) {
    if (e.size() != m.rows()) throw DomainError("drive vector dimension does not match the coupling matrix");
    DipoleSolution s;
    s.amplitudes = lu.solve(e);
    s.model = matrix.model();
    s.delta = delta;
    if (!s.amplitudes.allFinite())
      throw NumericalError("non-finite dipole amplitudes (seed=" + std::to_string(matrix.seed()) + ")", matrix.seed());
    out.push_back(std::move(s));
  }
  return out;
}

DipoleSolution solve_steady_state(const CouplingMatrix& matrix, double delta, const Eigen::VectorXcd& drive,
                                  const SolveOptions& options) {
  return std::move(solve_steady_state(matrix, delta, std::vector<Eigen::VectorXcd>{drive}, options).front());
}

double relative_residual(const CouplingMatrix& matrix, const DipoleSolution& solution, const Eigen::VectorXcd& drive) {
  const Eigen::VectorXcd r = matrix.at(solution.delta) * solution.amplitudes - drive;
  const double norm = drive.norm();
  if (norm == 0.0) return r.norm();
  return r.norm() / norm;
}

}  // namespace coopscat
