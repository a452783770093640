#include "coopscat/eigenmodes.hpp"

#include <algorithm>
#include <cmath>

namespace coopscat {

ModeSet eigensystem(const CouplingMatrix& coupling) {
  if (!coupling.uniform_response())
    throw DomainError("eigenmode analysis requires uniform atomic response (no local detunings)");
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(coupling.green(), true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge for a matrix of dimension " +
                             std::to_string(coupling.dimension()),
                         coupling.seed());
  ModeSet set;
  set.eigenvalues = solver.eigenvalues();
  set.modes = solver.eigenvectors();
  for (Eigen::Index q = 0; q < set.modes.cols(); ++q) set.modes.col(q).normalize();
  set.detunings = -0.5 * set.eigenvalues.real();
  set.linewidths = (1.0 + set.eigenvalues.imag().array()).matrix();
  set.basis_rcond = set.modes.size() == 0 ? 1.0 : Eigen::PartialPivLU<Eigen::MatrixXcd>(set.modes).rcond();
  return set;
}

ModeDecomposition decompose(const ModeSet& modes, const Eigen::VectorXcd& drive, double delta,
                            const DecomposeOptions& options) {
  if (drive.size() != modes.modes.rows()) throw DomainError("drive vector does not match the mode basis");
  ModeDecomposition d;
  d.delta = delta;
  if (modes.basis_rcond >= options.min_basis_rcond) {
    // Rows of the inverse mode matrix form the dual (left) basis, which also
    // handles degenerate pairs of a symmetric array correctly.
    d.drive_coefficients = Eigen::PartialPivLU<Eigen::MatrixXcd>(modes.modes).solve(drive);
  } else {
    d.drive_coefficients = modes.modes.completeOrthogonalDecomposition().solve(drive);
    d.least_squares_fallback = true;
  }
  const cplx inv_alpha = 1.0 / polarizability(delta);
  d.expansion = d.drive_coefficients.array() / (inv_alpha - modes.eigenvalues.array());
  // Modes are unit norm, so |b_q m_q|^2 = |b_q|^2.
  d.amplitudes = d.expansion.cwiseAbs2();
  return d;
}

Eigen::VectorXcd reconstruct(const ModeSet& modes, const ModeDecomposition& decomposition) {
  return modes.modes * decomposition.expansion;
}

std::size_t dominant_mode(const ModeDecomposition& decomposition) {
  Eigen::Index idx = 0;
  decomposition.amplitudes.maxCoeff(&idx);
  return static_cast<std::size_t>(idx);
}

double ModeHistogram::delta_center(int i) const {
  return delta_min + (i + 0.5) * (delta_max - delta_min) / delta_bins;
}

double ModeHistogram::gamma_center(int j) const {
  return gamma_min + (j + 0.5) * (gamma_max - gamma_min) / gamma_bins;
}

double ModeHistogram::total() const {
  double s = outside_mass;
  for (double m : mass) s += m;
  return s;
}

ModeHistogramAccumulator::ModeHistogramAccumulator(const HistogramGrid& grid)
    : grid_(grid), mass_(static_cast<std::size_t>(grid.delta_bins * grid.gamma_bins), 0.0) {
  if (grid.delta_bins < 1 || grid.gamma_bins < 1 || !(grid.delta_max > grid.delta_min) ||
      !(grid.gamma_max > grid.gamma_min))
    throw DomainError("invalid histogram grid");
}

void ModeHistogramAccumulator::add(const ModeSet& modes, const ModeDecomposition& decomposition) {
  const double sum = decomposition.amplitudes.sum();
  ++count_;
  if (!(sum > 0.0)) return;
  for (Eigen::Index q = 0; q < decomposition.amplitudes.size(); ++q) {
    // Each sample contributes unit mass so samples are weighted equally.
    const double w = decomposition.amplitudes[q] / sum;
    const double fd = (modes.detunings[q] - grid_.delta_min) / (grid_.delta_max - grid_.delta_min);
    const double fg = (modes.linewidths[q] - grid_.gamma_min) / (grid_.gamma_max - grid_.gamma_min);
    const int i = static_cast<int>(std::floor(fd * grid_.delta_bins));
    const int j = static_cast<int>(std::floor(fg * grid_.gamma_bins));
    if (i < 0 || i >= grid_.delta_bins || j < 0 || j >= grid_.gamma_bins)
      outside_ += w;
    else
      mass_[static_cast<std::size_t>(i * grid_.gamma_bins + j)] += w;
    total_ += w;
  }
}

ModeHistogram ModeHistogramAccumulator::result() const {
  if (count_ == 0) throw DomainError("mode histogram needs at least one decomposition");
  ModeHistogram h;
  h.delta_bins = grid_.delta_bins;
  h.gamma_bins = grid_.gamma_bins;
  h.delta_min = grid_.delta_min;
  h.delta_max = grid_.delta_max;
  h.gamma_min = grid_.gamma_min;
  h.gamma_max = grid_.gamma_max;
  h.mass = mass_;
  h.outside_mass = outside_;
  if (total_ > 0.0) {
    for (double& m : h.mass) m /= total_;
    h.outside_mass /= total_;
  }
  return h;
}

ModeHistogram mode_amplitude_histogram(const std::vector<std::pair<ModeSet, ModeDecomposition>>& samples,
                                       const HistogramGrid& grid) {
  if (samples.empty()) throw DomainError("mode histogram needs at least one decomposition");
  ModeHistogramAccumulator acc(grid);
  for (const auto& [m, d] : samples) acc.add(m, d);
  return acc.result();
}

}  // namespace coopscat
