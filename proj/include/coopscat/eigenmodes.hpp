#pragma once

// Cooperative eigenmodes of the interaction matrix. With uniform atomic
// response the system matrix is (1/alpha) I - G, so every mode q with
// G m_q = mu_q m_q has shift Delta_q = -Re[mu_q]/2 and width
// Gamma_q = 1 + Im[mu_q] (Gamma0 units).

#include "coopscat/solver.hpp"

#include <utility>
#include <vector>

namespace coopscat {

struct ModeSet {
  Eigen::VectorXcd eigenvalues;  // mu_q
  Eigen::MatrixXcd modes;        // unit-norm right eigenvectors as columns
  Eigen::VectorXd detunings;     // Delta_q
  Eigen::VectorXd linewidths;    // Gamma_q
  double basis_rcond = 1.0;      // reciprocal condition estimate of the mode basis

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Full non-Hermitian eigendecomposition of the interaction part.
/// Requires uniform response (all local detunings zero).
ModeSet eigensystem(const CouplingMatrix& coupling);

struct ModeDecomposition {
  Eigen::VectorXcd drive_coefficients;  // c_q
  Eigen::VectorXcd expansion;           // b_q(delta)
  Eigen::VectorXd amplitudes;           // |b_q m_q|^2
  double delta = 0.0;
  bool least_squares_fallback = false;
};

struct DecomposeOptions {
  // Below this reciprocal condition number of the mode basis the drive is
  // expanded by least squares instead of the dual basis.
  double min_basis_rcond = 1e-10;
};

/// Expands the projected drive in the modes and propagates each coefficient
/// with b_q = c_q / (1/alpha(delta) - mu_q).
ModeDecomposition decompose(const ModeSet& modes, const Eigen::VectorXcd& drive, double delta,
                            const DecomposeOptions& options = {});

/// sum_q b_q m_q
Eigen::VectorXcd reconstruct(const ModeSet& modes, const ModeDecomposition& decomposition);

/// Index of the mode holding the largest amplitude.
std::size_t dominant_mode(const ModeDecomposition& decomposition);

/// Amplitude-weighted density over (Delta, Gamma), normalized to unit mass.
struct ModeHistogram {
  int delta_bins = 81;
  int gamma_bins = 81;
  double delta_min = -3.0, delta_max = 3.0;
  double gamma_min = 0.0, gamma_max = 3.0;
  std::vector<double> mass;  // delta-major: mass[i * gamma_bins + j]
  double outside_mass = 0.0;  // fraction falling outside the grid

  double delta_center(int i) const;
  double gamma_center(int j) const;
  double at(int i, int j) const { return mass[static_cast<std::size_t>(i * gamma_bins + j)]; }
  double total() const;
};

struct HistogramGrid {
  int delta_bins = 81;
  int gamma_bins = 81;
  double delta_min = -3.0, delta_max = 3.0;
  double gamma_min = 0.0, gamma_max = 3.0;
};

/// Accumulates decompositions from many samples; thread-compatible, not thread-safe.
class ModeHistogramAccumulator {
public:
  explicit ModeHistogramAccumulator(const HistogramGrid& grid = {});
  void add(const ModeSet& modes, const ModeDecomposition& decomposition);
  std::size_t count() const { return count_; }
  ModeHistogram result() const;

private:
  HistogramGrid grid_;
  std::vector<double> mass_;
  double outside_ = 0.0;
  double total_ = 0.0;
  std::size_t count_ = 0;
};

ModeHistogram mode_amplitude_histogram(const std::vector<std::pair<ModeSet, ModeDecomposition>>& samples,
                                       const HistogramGrid& grid = {});

}  // namespace coopscat
