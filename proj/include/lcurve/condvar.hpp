#pragma once

#include <span>
#include <vector>

#include "lcurve/randcorr.hpp"

namespace lcurve {

struct ConditioningOptions {
  /// Minimum Schur-complement pivot accepted by a Cholesky step.
  double pivot_tol = 1e-10;
  /// Extensions between factor rebuilds.
  int audit_interval = 25;
  /// Drift between the incremental and rebuilt mse that counts as a drift rebuild.
  double audit_tol = 1e-8;
  /// Eigenvalues below ginv_rel_tol * lambda_max are dropped by the generalized inverse.
  double ginv_rel_tol = 1e-10;

  void validate() const;
};

/// Residual variance of `target` given the predictors added so far.
///
/// The Cholesky factor covers `factor_vars`, the predictors that were not
/// numerically dependent on earlier ones when added. A dependent predictor
/// adds nothing to R^2 under the generalized inverse, so skipping it keeps
/// the factor well conditioned without changing the answer.
struct ConditioningState {
  int target = -1;
  std::vector<int> predictors;
  std::vector<int> factor_vars;
  /// Packed lower-triangular rows; row i starts at i*(i+1)/2 and has i+1 entries.
  std::vector<double> chol;
  /// L^{-1} Sigma_{x,y} over factor_vars.
  std::vector<double> solved_cross;
  double r2 = 0.0;
  double mse = 1.0;

  int extensions_since_rebuild = 0;
  int rebuilds = 0;
  int drift_rebuilds = 0;
  int fallbacks = 0;

  std::span<const double> chol_row(std::size_t i) const {
    return {chol.data() + i * (i + 1) / 2, i + 1};
  }

  friend bool operator==(const ConditioningState&, const ConditioningState&) = default;
};

/// 1 - Sigma_{y,x} Sigma_{x,x}^{-1} Sigma_{y,x}, clamped to [0, 1].
/// Cholesky solve when every pivot clears pivot_tol, eigendecomposition-based
/// generalized inverse otherwise. Throws ArgumentError on invalid or repeated indices.
double conditional_variance_direct(const CorrelationMatrix& sigma, int target, std::span<const int> predictors,
                                   const ConditioningOptions& opts = {});

ConditioningState init_conditioning(const CorrelationMatrix& sigma, int target);

/// Adds one predictor in O(k^2). The returned mse never exceeds the input mse.
ConditioningState extend_conditioning(ConditioningState state, const CorrelationMatrix& sigma, int new_var,
                                      const ConditioningOptions& opts = {});

}  // namespace lcurve
