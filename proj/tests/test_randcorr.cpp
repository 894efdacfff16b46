#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcurve/errors.hpp"
#include "lcurve/randcorr.hpp"
#include "lcurve/rng.hpp"
#include "oracles.hpp"

using namespace lcurve;

namespace {

std::vector<double> draws(const DistributionSpec& spec, int n, std::uint64_t seed = 11) {
  RngStream rng(seed, 0);
  std::vector<double> v(n);
  for (double& x : v) x = sample_correlation(spec, rng);
  return v;
}

void check_correlation_invariants(const Eigen::MatrixXd& m) {
  REQUIRE(m.rows() == m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    CHECK(m(i, i) == 1.0);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      CHECK(m(i, j) == m(j, i));
      CHECK(std::abs(m(i, j)) <= 1.0);
    }
  }
}

}  // namespace

TEST_CASE("family names") {
  CHECK(parse_family("student_t") == Family::student_t);
  CHECK(parse_family("point_mass") == Family::point_mass);
  try {
    parse_family("gaussian");
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    const std::string msg = e.what();
    for (const char* f : {"student_t", "beta_recentered", "lognormal_recentered", "point_mass"}) {
      CHECK(msg.find(f) != std::string::npos);
    }
  }
}

TEST_CASE("spec validation") {
  DistributionSpec s;
  CHECK_NOTHROW(s.validate());
  s.sigma = -0.1;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = DistributionSpec{};
  s.dof = 0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = DistributionSpec::point_mass_at(1.5);
  CHECK_THROWS_AS(s.validate(), ArgumentError);
}

TEST_CASE("point mass is exact") {
  RngStream rng(1, 0);
  for (int i = 0; i < 10; ++i) CHECK(sample_correlation(DistributionSpec::point_mass_at(0.5), rng) == 0.5);
}

TEST_CASE("student_t mean over 1e5 draws") {
  const auto v = draws(DistributionSpec::student(0.0, 0.1, 1000), 100000);
  CHECK(std::abs(oracle::mean(v)) <= 3 * 0.1 / std::sqrt(1e5));
}

TEST_CASE("student_t variance within 5% of sigma^2") {
  for (double s : {0.025, 0.05, 0.1}) {
    CAPTURE(s);
    const auto v = draws(DistributionSpec::student(0.0, s, 1000), 100000, 17);
    CHECK(std::abs(oracle::sample_variance(v) / (s * s) - 1.0) < 0.05);
  }
}

TEST_CASE("fat tails stay strictly inside (-1, 1)") {
  const auto v = draws(DistributionSpec::student(0.5, 0.1, 1), 100000);
  for (double x : v) REQUIRE((x > -1.0 && x < 1.0));
}

TEST_CASE("recentered families have the requested mean") {
  DistributionSpec beta;
  beta.family = Family::beta_recentered;
  beta.mean = 0.1;
  beta.shape1 = 2;
  beta.shape2 = 5;
  // Beta(2,5) - 2/7 lies in [-0.29, 0.71]; +0.1 stays inside (-1, 1), no truncation.
  const auto vb = draws(beta, 100000);
  const double sd_b = std::sqrt(2.0 * 5.0 / (49.0 * 8.0));
  CHECK(std::abs(oracle::mean(vb) - 0.1) < 4 * sd_b / std::sqrt(1e5));

  DistributionSpec logn;
  logn.family = Family::lognormal_recentered;
  logn.mean = 0.0;
  logn.log_sigma = 0.1;
  // Tail mass beyond (-1, 1) is negligible at log_sigma = 0.1.
  const auto vl = draws(logn, 100000);
  const double sd_l = std::sqrt((std::exp(0.01) - 1) * std::exp(0.01));
  CHECK(std::abs(oracle::mean(vl)) < 4 * sd_l / std::sqrt(1e5));
}

TEST_CASE("impossible spec reports degenerate after the rejection cap") {
  RngStream rng(1, 0);
  // Location 30 with a tiny scale never lands in (-1, 1).
  CHECK_THROWS_AS(sample_correlation(DistributionSpec::student(30.0, 0.01, 1000), rng), DegenerateSpecError);
}

TEST_CASE("is_positive_definite examples") {
  CHECK(is_positive_definite(Eigen::MatrixXd::Identity(5, 5)));
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  CHECK_FALSE(is_positive_definite(ones));
  Eigen::MatrixXd m(3, 3);
  m << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
  // det = 1 - 3(0.81) - 2(0.729) < 0
  CHECK(m.determinant() < 0);
  CHECK_FALSE(is_positive_definite(m));
}

TEST_CASE("draw_correlation_matrix examples") {
  RngStream r1(1, 0);
  auto id = draw_correlation_matrix(3, DistributionSpec::point_mass_at(0.0), r1);
  CHECK(id.entries == Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.pd_status == PdStatus::positive_definite);

  RngStream r2(1, 0);
  auto eq = draw_correlation_matrix(100, DistributionSpec::point_mass_at(0.5), r2);
  CHECK(eq.pd_status == PdStatus::positive_definite);
  CHECK((eq.entries - oracle::equicorrelation(100, 0.5)).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eq.entries);
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1 + 99 * 0.5).epsilon(1e-10));

  RngStream a(9, 3), b(9, 3);
  const auto ma = draw_correlation_matrix(3, DistributionSpec{}, a);
  const auto mb = draw_correlation_matrix(3, DistributionSpec{}, b);
  CHECK(ma.entries == mb.entries);
}

TEST_CASE("fill order is upper triangle row-major") {
  const DistributionSpec spec = DistributionSpec::student(0.0, 0.2, 1000);
  RngStream a(4, 4), b(4, 4);
  const auto m = draw_correlation_matrix(6, spec, a);
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) CHECK(m(i, j) == sample_correlation(spec, b));
  }
  CHECK(off_diagonal(m.entries).size() == 15);
  CHECK(off_diagonal(m.entries)[0] == m(0, 1));
  CHECK(off_diagonal(m.entries)[5] == m(1, 2));
}

TEST_CASE("drawn matrices satisfy the correlation invariants") {
  for (Family f : {Family::student_t, Family::beta_recentered, Family::lognormal_recentered, Family::point_mass}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      DistributionSpec spec;
      spec.family = f;
      spec.mean = 0.2;
      spec.sigma = 0.3;
      spec.dof = 3;
      spec.log_sigma = 0.3;
      RngStream rng(seed, 0);
      const auto m = draw_correlation_matrix(12, spec, rng);
      check_correlation_invariants(m.entries);
      CHECK(m.pd_status == (is_positive_definite(m.entries) ? PdStatus::positive_definite : PdStatus::near_singular));
    }
  }
}

TEST_CASE("relabeling keeps the off-diagonal multiset") {
  RngStream rng(2, 0);
  const auto m = draw_correlation_matrix(8, DistributionSpec{}, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(8);
  p.indices() << 3, 7, 0, 5, 1, 6, 2, 4;
  const Eigen::MatrixXd q = p * m.entries * p.transpose();
  auto a = off_diagonal(m.entries), b = off_diagonal(q);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("point mass matrices ignore the seed") {
  RngStream a(1, 0), b(123456, 77);
  CHECK(draw_correlation_matrix(7, DistributionSpec::point_mass_at(0.3), a).entries ==
        draw_correlation_matrix(7, DistributionSpec::point_mass_at(0.3), b).entries);
}
