#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Core>

#include "qcollapse/grid.hpp"

namespace qcollapse {

class EigensolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowest eigenpairs of a discretized Hamiltonian.
///
/// Columns of `states` are real eigenvectors normalized so that
/// sum_i v_i^2 dx = 1. Sign convention: the first component whose magnitude
/// exceeds 1e-3 of the column maximum is positive.
struct EigenSystem {
  SpatialGrid grid;
  Eigen::VectorXd energies;
  Eigen::MatrixXd states;

  std::size_t n_kept() const { return static_cast<std::size_t>(energies.size()); }
  auto mode(std::size_t n) const { return states.col(static_cast<Eigen::Index>(n)); }
};

struct EigenDiagnostics {
  double max_residual = 0.0;          // max_n ||H v - E v|| / ||v||
  double max_orthonormality = 0.0;    // max_ij |<v_i|v_j>_dx - delta_ij|
  double min_gap = 0.0;               // min_n E_{n+1} - E_n
};

/// Eigenvalues of the symmetric tridiagonal matrix (diag, sub) by the implicit
/// QL method with Wilkinson-type shifts. Returns them ascending. Throws
/// EigensolverError if an eigenvalue needs more than `max_iterations` sweeps.
Eigen::VectorXd tridiagonal_eigenvalues(Eigen::VectorXd diag, Eigen::VectorXd sub, int max_iterations = 60);

/// Orthogonal similarity reduction of a symmetric band matrix to tridiagonal
/// form by Givens rotations with bulge chasing. Returns (diag, sub).
std::pair<Eigen::VectorXd, Eigen::VectorXd> reduce_to_tridiagonal(const SymmetricBandMatrix& h);

/// All eigenvalues of a symmetric band matrix, ascending.
Eigen::VectorXd band_eigenvalues(const SymmetricBandMatrix& h);

/// Lowest `n_kept` eigenpairs. Eigenvectors come from inverse iteration on the
/// band matrix, re-orthogonalized and checked against the residual bound 1e-8.
EigenSystem eigensolve(const SymmetricBandMatrix& h, const SpatialGrid& g, std::size_t n_kept);

EigenDiagnostics diagnose(const SymmetricBandMatrix& h, const EigenSystem& es);

}  // namespace qcollapse
