#include "lcurve/randcorr.hpp"

#include <cmath>
#include <vector>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <fmt/format.h>

#include "lcurve/errors.hpp"

namespace lcurve {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::student_t: return "student_t";
    case Family::beta_recentered: return "beta_recentered";
    case Family::lognormal_recentered: return "lognormal_recentered";
    case Family::point_mass: return "point_mass";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::student_t, Family::beta_recentered, Family::lognormal_recentered,
                   Family::point_mass}) {
    if (name == to_string(f)) return f;
  }
  throw ArgumentError(fmt::format(
      "unknown distribution family '{}'; valid families: student_t, beta_recentered, "
      "lognormal_recentered, point_mass",
      name));
}

std::string_view to_string(PdStatus s) {
  switch (s) {
    case PdStatus::positive_definite: return "positive_definite";
    case PdStatus::repaired: return "repaired";
    case PdStatus::near_singular: return "near_singular";
  }
  return "unknown";
}

void DistributionSpec::validate() const {
  if (!(mean > -1.0 && mean < 1.0)) throw ArgumentError(fmt::format("mean must lie in (-1, 1), got {}", mean));
  if (family == Family::point_mass) return;
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError(fmt::format("sigma must be >= 0, got {}", sigma));
  switch (family) {
    case Family::student_t:
      if (!(dof > 0.0)) throw ArgumentError(fmt::format("dof must be > 0, got {}", dof));
      break;
    case Family::beta_recentered:
      if (!(shape1 > 0.0) || !(shape2 > 0.0)) {
        throw ArgumentError(fmt::format("beta shapes must be > 0, got ({}, {})", shape1, shape2));
      }
      break;
    case Family::lognormal_recentered:
      if (!(log_sigma > 0.0)) throw ArgumentError(fmt::format("log_sigma must be > 0, got {}", log_sigma));
      break;
    case Family::point_mass: break;
  }
}

DistributionSpec DistributionSpec::point_mass_at(double mean) {
  DistributionSpec s;
  s.family = Family::point_mass;
  s.mean = mean;
  s.sigma = 0.0;
  return s;
}

DistributionSpec DistributionSpec::student(double mean, double sigma, double dof) {
  DistributionSpec s;
  s.family = Family::student_t;
  s.mean = mean;
  s.sigma = sigma;
  s.dof = dof;
  return s;
}

namespace {

double draw_untruncated(const DistributionSpec& spec, RngStream& rng) {
  switch (spec.family) {
    case Family::student_t: {
      boost::random::student_t_distribution<double> t(spec.dof);
      return spec.mean + spec.sigma * t(rng);
    }
    case Family::beta_recentered: {
      boost::random::beta_distribution<double> b(spec.shape1, spec.shape2);
      return b(rng) - spec.shape1 / (spec.shape1 + spec.shape2) + spec.mean;
    }
    case Family::lognormal_recentered: {
      // boost parameterizes by the mean/sd of the log; m=0, s=log_sigma.
      boost::random::lognormal_distribution<double> ln(0.0, spec.log_sigma);
      return ln(rng) - std::exp(0.5 * spec.log_sigma * spec.log_sigma) + spec.mean;
    }
    case Family::point_mass: return spec.mean;
  }
  return spec.mean;
}

}  // namespace

double sample_correlation(const DistributionSpec& spec, RngStream& rng) {
  if (spec.family == Family::point_mass || (spec.family == Family::student_t && spec.sigma == 0.0)) {
    return spec.mean;
  }
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double x = draw_untruncated(spec, rng);
    if (x > -1.0 && x < 1.0) return x;
  }
  throw DegenerateSpecError(fmt::format(
      "{} draw rejected {} times: mean={} sigma={} is incompatible with (-1, 1)", to_string(spec.family),
      kMaxRejections, spec.mean, spec.sigma));
}

bool is_positive_definite(const Eigen::MatrixXd& m, double tol) {
  const Eigen::Index n = m.rows();
  if (n != m.cols()) return false;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot >= tol)) return false;
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
  }
  return true;
}

CorrelationMatrix draw_correlation_matrix(int K, const DistributionSpec& spec, RngStream& rng) {
  if (K < 2) throw ArgumentError(fmt::format("correlation matrix needs K >= 2, got {}", K));
  spec.validate();
  CorrelationMatrix out;
  out.entries = Eigen::MatrixXd::Identity(K, K);
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) {
      const double r = sample_correlation(spec, rng);
      out.entries(i, j) = r;
      out.entries(j, i) = r;
    }
  }
  out.pd_status = is_positive_definite(out.entries) ? PdStatus::positive_definite : PdStatus::near_singular;
  return out;
}

std::vector<double> off_diagonal(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  const Eigen::Index n = m.rows();
  v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v.push_back(m(i, j));
  return v;
}

}  // namespace lcurve
