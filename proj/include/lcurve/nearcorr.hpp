#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lcurve/randcorr.hpp"

namespace lcurve {

struct ProjectionConfig {
  /// Relative Frobenius change between successive unit-diagonal iterates.
  double conv_tol = 1e-7;
  int max_iter = 200;
  /// Eigenvalue floor of the final clip.
  double min_eig = 1e-8;

  void validate() const;
};

/// Eigenvalues below min_eig are raised to min_eig. Output is symmetric bit-exactly.
/// Throws NumericalError when the eigensolver fails.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m, double min_eig);

/// Diagonal set to exactly 1; off-diagonals untouched.
Eigen::MatrixXd project_unit_diagonal(Eigen::MatrixXd m);

struct NearestCorrelationResult {
  CorrelationMatrix matrix;
  int iterations = 0;
  bool converged = true;
  /// ||input - Y_k||_F after each Dykstra sweep (empty when the input was already PD).
  std::vector<double> distance_trace;
};

/// Nearest correlation matrix by alternating projections with Dykstra's
/// correction (PSD cone <-> unit-diagonal set), then an eigenvalue floor at
/// cfg.min_eig and a D^-1/2 M D^-1/2 rescale. Inputs that already pass
/// is_positive_definite are returned unchanged with status positive_definite.
/// Hitting max_iter is reported through `converged`, not thrown.
NearestCorrelationResult nearest_correlation(const Eigen::MatrixXd& m, const ProjectionConfig& cfg = {});

}  // namespace lcurve
