#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "lcurve/rng.hpp"

namespace lcurve {

enum class Family { student_t, beta_recentered, lognormal_recentered, point_mass };

std::string_view to_string(Family f);
/// Throws ArgumentError naming the valid families.
Family parse_family(std::string_view name);

/// Distribution of a single off-diagonal correlation coefficient.
///
/// `sigma` is the scale of the untruncated law (for student_t, the scale of
/// the location-scale t; it equals the standard deviation of the limiting
/// normal as dof grows). beta_recentered and lognormal_recentered are
/// shifted so their analytical mean lands on `mean`; their spread comes from
/// the shape parameters and log_sigma respectively.
struct DistributionSpec {
  Family family = Family::student_t;
  double mean = 0.5;
  double sigma = 0.1;
  double dof = 1000.0;
  double shape1 = 2.0;
  double shape2 = 2.0;
  double log_sigma = 0.5;

  /// Throws ArgumentError when an invariant is violated.
  void validate() const;

  static DistributionSpec point_mass_at(double mean);
  static DistributionSpec student(double mean, double sigma, double dof);
};

inline constexpr int kMaxRejections = 10000;

/// One draw, truncated to (-1, 1) by rejection.
/// Throws DegenerateSpecError after kMaxRejections consecutive rejections.
double sample_correlation(const DistributionSpec& spec, RngStream& rng);

enum class PdStatus { positive_definite, repaired, near_singular };

std::string_view to_string(PdStatus s);

/// Symmetric, unit-diagonal matrix with off-diagonals in [-1, 1].
struct CorrelationMatrix {
  Eigen::MatrixXd entries;
  PdStatus pd_status = PdStatus::positive_definite;

  Eigen::Index dim() const { return entries.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries(i, j); }
};

inline constexpr double kDefaultPivotTol = 1e-10;

/// Cholesky with every pivot (the Schur complement diagonal before the square
/// root) required to be >= tol.
bool is_positive_definite(const Eigen::MatrixXd& m, double tol = kDefaultPivotTol);

/// Fill the upper triangle row-major with K(K-1)/2 draws, mirror it, set the
/// diagonal to 1 and classify with is_positive_definite.
CorrelationMatrix draw_correlation_matrix(int K, const DistributionSpec& spec, RngStream& rng);

/// Upper-triangle off-diagonal entries in row-major order.
std::vector<double> off_diagonal(const Eigen::MatrixXd& m);

}  // namespace lcurve
