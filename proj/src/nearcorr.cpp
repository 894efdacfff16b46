#include "lcurve/nearcorr.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lcurve/errors.hpp"

namespace lcurve {

void ProjectionConfig::validate() const {
  if (!(conv_tol > 0.0)) throw ArgumentError(fmt::format("higham.conv_tol must be > 0, got {}", conv_tol));
  if (!(min_eig >= 0.0)) throw ArgumentError(fmt::format("higham.min_eig must be >= 0, got {}", min_eig));
  if (max_iter < 1) throw ArgumentError(fmt::format("higham.max_iter must be >= 1, got {}", max_iter));
}

namespace {

void symmetrize(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
}

}  // namespace

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m, double min_eig) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericalError(fmt::format("eigendecomposition failed: n={} frobenius={} finite={}", m.rows(),
                                     m.norm(), m.allFinite()));
  }
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(min_eig);
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd out = v * ev.asDiagonal() * v.transpose();
  symmetrize(out);
  return out;
}

Eigen::MatrixXd project_unit_diagonal(Eigen::MatrixXd m) {
  m.diagonal().setOnes();
  return m;
}

NearestCorrelationResult nearest_correlation(const Eigen::MatrixXd& m, const ProjectionConfig& cfg) {
  cfg.validate();
  NearestCorrelationResult res;
  if (is_positive_definite(m)) {
    res.matrix.entries = m;
    res.matrix.pd_status = PdStatus::positive_definite;
    return res;
  }

  const Eigen::Index n = m.rows();
  Eigen::MatrixXd y = m;
  Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(n, n);
  res.converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Eigen::MatrixXd r = y - correction;
    symmetrize(r);
    Eigen::MatrixXd x = project_psd(r, 0.0);
    correction = x - r;
    symmetrize(correction);
    Eigen::MatrixXd y_next = project_unit_diagonal(std::move(x));
    const double change = (y_next - y).norm() / std::max(y_next.norm(), 1.0);
    y = std::move(y_next);
    res.iterations = it;
    res.distance_trace.push_back((m - y).norm());
    if (change < cfg.conv_tol) {
      res.converged = true;
      break;
    }
  }

  // Floor and rescale. Rescaling can pull the smallest eigenvalue below the
  // floor by a factor max(diag); a few rounds settle it.
  for (int round = 0; round < 8; ++round) {
    Eigen::MatrixXd clipped = project_psd(y, cfg.min_eig);
    Eigen::VectorXd inv_sqrt = clipped.diagonal().cwiseSqrt().cwiseInverse();
    y = inv_sqrt.asDiagonal() * clipped * inv_sqrt.asDiagonal();
    symmetrize(y);
    y.diagonal().setOnes();
    y = y.cwiseMax(-1.0).cwiseMin(1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success && es.eigenvalues()(0) >= cfg.min_eig - 1e-12) break;
  }

  res.matrix.entries = std::move(y);
  res.matrix.pd_status = is_positive_definite(res.matrix.entries) ? PdStatus::repaired : PdStatus::near_singular;
  return res;
}

}  // namespace lcurve
