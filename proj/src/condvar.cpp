#include "lcurve/condvar.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lcurve/errors.hpp"
#include "lcurve/kernels.hpp"

namespace lcurve {

void ConditioningOptions::validate() const {
  if (!(pivot_tol > 0.0)) throw ArgumentError("condvar.pivot_tol must be > 0");
  if (audit_interval < 1) throw ArgumentError("condvar.audit_interval must be >= 1");
  if (!(audit_tol > 0.0)) throw ArgumentError("condvar.audit_tol must be > 0");
  if (!(ginv_rel_tol > 0.0)) throw ArgumentError("condvar.ginv_rel_tol must be > 0");
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_index(const CorrelationMatrix& sigma, int idx, const char* what) {
  if (idx < 0 || idx >= sigma.dim()) {
    throw ArgumentError(fmt::format("{} index {} out of range [0, {})", what, idx, sigma.dim()));
  }
}

}  // namespace

double conditional_variance_direct(const CorrelationMatrix& sigma, int target, std::span<const int> predictors,
                                   const ConditioningOptions& opts) {
  check_index(sigma, target, "target");
  std::vector<int> seen(predictors.begin(), predictors.end());
  for (int p : predictors) {
    check_index(sigma, p, "predictor");
    if (p == target) throw ArgumentError(fmt::format("predictor {} equals the target", p));
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw ArgumentError("duplicate predictor index");
  }
  const auto k = static_cast<Eigen::Index>(predictors.size());
  if (k == 0) return 1.0;

  Eigen::MatrixXd sxx(k, k);
  Eigen::VectorXd sxy(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    sxy(a) = sigma(predictors[a], target);
    for (Eigen::Index b = 0; b < k; ++b) sxx(a, b) = sigma(predictors[a], predictors[b]);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(sxx);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd& l = llt.matrixLLT();
    if (l.diagonal().cwiseAbs2().minCoeff() >= opts.pivot_tol) {
      Eigen::VectorXd z = llt.matrixL().solve(sxy);
      return clamp01(1.0 - z.squaredNorm());
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sxx);
  if (es.info() != Eigen::Success) {
    throw NumericalError(fmt::format("generalized inverse: eigendecomposition failed (k={})", k));
  }
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double cutoff = opts.ginv_rel_tol * lambda.maxCoeff();
  Eigen::VectorXd proj = es.eigenvectors().transpose() * sxy;
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (lambda(i) > cutoff) r2 += proj(i) * proj(i) / lambda(i);
  }
  return clamp01(1.0 - r2);
}

ConditioningState init_conditioning(const CorrelationMatrix& sigma, int target) {
  check_index(sigma, target, "target");
  ConditioningState s;
  s.target = target;
  return s;
}

namespace {

// Replace the incremental factor with a fresh Eigen LLT over factor_vars.
// Returns false (state untouched) when the fresh factorization fails.
bool rebuild_factor(ConditioningState& s, const CorrelationMatrix& sigma, const ConditioningOptions& opts) {
  const auto k = static_cast<Eigen::Index>(s.factor_vars.size());
  if (k == 0) return true;
  Eigen::MatrixXd sxx(k, k);
  Eigen::VectorXd sxy(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    sxy(a) = sigma(s.factor_vars[a], s.target);
    for (Eigen::Index b = 0; b < k; ++b) sxx(a, b) = sigma(s.factor_vars[a], s.factor_vars[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sxx);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::MatrixXd& l = llt.matrixLLT();
  if (l.diagonal().cwiseAbs2().minCoeff() < opts.pivot_tol) return false;
  Eigen::VectorXd z = llt.matrixL().solve(sxy);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) s.chol[static_cast<std::size_t>(i * (i + 1) / 2 + j)] = l(i, j);
    s.solved_cross[static_cast<std::size_t>(i)] = z(i);
  }
  return true;
}

}  // namespace

ConditioningState extend_conditioning(ConditioningState state, const CorrelationMatrix& sigma, int new_var,
                                      const ConditioningOptions& opts) {
  check_index(sigma, new_var, "predictor");
  if (new_var == state.target) throw ArgumentError(fmt::format("predictor {} equals the target", new_var));
  if (std::find(state.predictors.begin(), state.predictors.end(), new_var) != state.predictors.end()) {
    throw ArgumentError(fmt::format("predictor {} already in the conditioning set", new_var));
  }

  const std::size_t k = state.factor_vars.size();
  std::vector<double> row(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    const auto li = state.chol_row(i);
    const double partial = kernels::dot(li.first(i), std::span<const double>(row).first(i));
    row[i] = (sigma(state.factor_vars[i], new_var) - partial) / li[i];
  }
  const std::span<const double> solved(row.data(), k);
  const double pivot = sigma(new_var, new_var) - kernels::sum_squares(solved);

  double candidate;
  bool direct_fallback = false;
  state.predictors.push_back(new_var);
  if (pivot >= opts.pivot_tol) {
    const double d = std::sqrt(pivot);
    const double w = (sigma(new_var, state.target) - kernels::dot(solved, state.solved_cross)) / d;
    row[k] = d;
    state.chol.insert(state.chol.end(), row.begin(), row.end());
    state.factor_vars.push_back(new_var);
    state.solved_cross.push_back(w);
    candidate = 1.0 - kernels::sum_squares(state.solved_cross);
  } else {
    ++state.fallbacks;
    direct_fallback = true;
    candidate = conditional_variance_direct(sigma, state.target, state.predictors, opts);
  }

  if (++state.extensions_since_rebuild >= opts.audit_interval) {
    state.extensions_since_rebuild = 0;
    if (rebuild_factor(state, sigma, opts)) {
      ++state.rebuilds;
      const double fresh = 1.0 - kernels::sum_squares(state.solved_cross);
      if (std::abs(clamp01(fresh) - clamp01(candidate)) > opts.audit_tol) ++state.drift_rebuilds;
      if (!direct_fallback) candidate = fresh;
    }
  }

  state.mse = std::min(state.mse, clamp01(candidate));
  state.r2 = 1.0 - state.mse;
  return state;
}

}  // namespace lcurve
