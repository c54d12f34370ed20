#include <doctest.h>

#include <cmath>
#include <random>

#include "adages/data_gen.hpp"
#include "adages/knockoff.hpp"

using namespace adages;

namespace {

double column_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd xa = a.array() - a.mean();
  Eigen::VectorXd xb = b.array() - b.mean();
  return xa.dot(xb) / std::sqrt(xa.squaredNorm() * xb.squaredNorm());
}

}  // namespace

TEST_CASE("sample moments with ridge floor") {
  SUBCASE("two-point toy example") {
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, -1, 0;
    MomentEstimate m = estimate_moments(X);
    CHECK(m.mu(0) == 0.0);
    CHECK(m.mu(1) == 0.0);
    // Unbiased variance of {1,-1} is 2; the flat column keeps only the
    // relative floor delta = 1e-6 * mean(diag) = 1e-6.
    CHECK(m.sigma(0, 0) == doctest::Approx(2.0 + 1e-6));
    CHECK(m.sigma(1, 1) == doctest::Approx(1e-6).epsilon(1e-3));
    CHECK(m.sigma(0, 1) == 0.0);
    REQUIRE(m.floored_columns.size() == 1);
    CHECK(m.floored_columns[0] == 1);
  }

  SUBCASE("identical rows collapse to the absolute floor") {
    Eigen::MatrixXd X(3, 4);
    X.row(0) << 1, 2, 3, 4;
    X.row(1) = X.row(0);
    X.row(2) = X.row(0);
    MomentEstimate m = estimate_moments(X);
    CHECK(m.floored_columns.size() == 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(m.sigma(j, j) == doctest::Approx(1e-6));
      for (int l = 0; l < 4; ++l) {
        if (l != j) CHECK(m.sigma(j, l) == 0.0);
      }
    }
  }

  SUBCASE("consistency against the AR(1) generator") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd X = ar1_design(10000, 6, 0.25, rng);
    MomentEstimate m = estimate_moments(X);
    for (int a = 0; a < 6; ++a) {
      CHECK(std::abs(m.mu(a)) < 0.05);
      for (int b = 0; b < 6; ++b) {
        const double target = std::pow(0.25, std::abs(a - b));
        CHECK(std::abs(m.sigma(a, b) - target) < 0.05);
      }
    }
  }

  SUBCASE("rejects bad input") {
    Eigen::MatrixXd one_row(1, 3);
    one_row.setZero();
    CHECK_THROWS_AS(estimate_moments(one_row), std::invalid_argument);
    Eigen::MatrixXd with_nan(3, 2);
    with_nan.setZero();
    with_nan(1, 1) = std::nan("");
    CHECK_THROWS_AS(estimate_moments(with_nan), std::invalid_argument);
  }
}

TEST_CASE("correlation shrinkage adapts to sample size") {
  std::mt19937_64 rng(17);
  SUBCASE("square regime gets substantial shrinkage and a usable spectrum") {
    Eigen::MatrixXd X = ar1_design(50, 50, 0.25, rng);
    MomentEstimate m = estimate_moments(X);
    ShrunkCovariance sc = shrink_covariance(X, m);
    CHECK(sc.intensity > 0.1);
    CHECK(sc.intensity <= 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sc.sigma, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > 0.05);
  }

  SUBCASE("large samples barely shrink") {
    Eigen::MatrixXd X = ar1_design(5000, 5, 0.25, rng);
    MomentEstimate m = estimate_moments(X);
    ShrunkCovariance sc = shrink_covariance(X, m);
    CHECK(sc.intensity < 0.15);
    // Diagonal preserved from the base estimate.
    for (int j = 0; j < 5; ++j) {
      CHECK(sc.sigma(j, j) == doctest::Approx(m.sigma(j, j)).epsilon(1e-6));
    }
  }

  SUBCASE("single column passes through") {
    Eigen::MatrixXd X = ar1_design(30, 1, 0.0, rng);
    MomentEstimate m = estimate_moments(X);
    ShrunkCovariance sc = shrink_covariance(X, m);
    CHECK(sc.intensity == 0.0);
    CHECK(sc.sigma(0, 0) == doctest::Approx(m.sigma(0, 0)));
  }
}

TEST_CASE("equicorrelated knockoff diagonal") {
  SUBCASE("identity covariance saturates at one") {
    Eigen::VectorXd s = equicorrelated_s(Eigen::MatrixXd::Identity(4, 4));
    for (int j = 0; j < 4; ++j) CHECK(s(j) == doctest::Approx(1.0));
  }

  SUBCASE("two-by-two closed forms") {
    Eigen::MatrixXd half(2, 2);
    half << 1, 0.5, 0.5, 1;
    Eigen::VectorXd s = equicorrelated_s(half);
    CHECK(s(0) == doctest::Approx(1.0));

    Eigen::MatrixXd nine(2, 2);
    nine << 1, 0.9, 0.9, 1;
    s = equicorrelated_s(nine);
    CHECK(s(0) == doctest::Approx(0.2));
    CHECK(s(1) == doctest::Approx(0.2));
  }

  SUBCASE("covariance scale multiplies through") {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 4, 1, 1, 1;  // correlation 0.5 -> s_corr = 1
    Eigen::VectorXd s = equicorrelated_s(sigma);
    CHECK(s(0) == doctest::Approx(4.0));
    CHECK(s(1) == doctest::Approx(1.0));
  }

  SUBCASE("rejects non positive definite input") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(equicorrelated_s(bad), std::invalid_argument);
    Eigen::MatrixXd zero_diag = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(equicorrelated_s(zero_diag), std::invalid_argument);
  }
}

TEST_CASE("knockoff model validation") {
  KnockoffModel ok{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                   Eigen::VectorXd::Ones(2)};
  CHECK_NOTHROW(ok.validate());

  KnockoffModel negative = ok;
  negative.s(0) = -0.1;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

  KnockoffModel oversized = ok;
  oversized.s.setConstant(3.0);  // 2s - s^2 = -3 < 0
  CHECK_THROWS_AS(oversized.validate(), std::invalid_argument);

  KnockoffModel asym = ok;
  asym.sigma(0, 1) = 1e-3;
  CHECK_THROWS_AS(asym.validate(), std::invalid_argument);
}

TEST_CASE("knockoff sampling") {
  std::mt19937_64 rng(23);

  SUBCASE("zero s degenerates to an exact copy") {
    Eigen::MatrixXd X = ar1_design(40, 3, 0.25, rng);
    MomentEstimate m = estimate_moments(X);
    KnockoffModel model{m.mu, m.sigma, Eigen::VectorXd::Zero(3)};
    Eigen::MatrixXd Xk = sample_knockoffs(X, model, rng);
    CHECK(Xk == X);
  }

  SUBCASE("independent case decorrelates feature and knockoff") {
    Eigen::MatrixXd X = ar1_design(5000, 4, 0.0, rng);
    KnockoffModel model{Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4),
                        Eigen::VectorXd::Ones(4)};
    Eigen::MatrixXd Xk = sample_knockoffs(X, model, rng);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(column_corr(X.col(j), Xk.col(j))) < 0.05);
      CHECK(std::abs(Xk.col(j).mean()) < 0.05);
      const double var = (Xk.col(j).array() - Xk.col(j).mean()).square().mean();
      CHECK(std::abs(var - 1.0) < 0.1);
    }
  }

  SUBCASE("exchangeability moments on a correlated design") {
    // With Sigma known exactly, cross covariances must reproduce
    // Sigma - diag(s) on the (j, j) pairs and Sigma elsewhere.
    const double rho = 0.5;
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1, rho, rho, 1;
    std::mt19937_64 gen(99);
    Eigen::MatrixXd X = ar1_design(20000, 2, rho, gen);
    Eigen::VectorXd s = equicorrelated_s(sigma);
    KnockoffModel model{Eigen::VectorXd::Zero(2), sigma, s};
    Eigen::MatrixXd Xk = sample_knockoffs(X, model, gen);
    const double n = static_cast<double>(X.rows());
    Eigen::MatrixXd cross = X.transpose() * Xk / n;
    CHECK(std::abs(cross(0, 0) - (1.0 - s(0))) < 0.05);
    CHECK(std::abs(cross(0, 1) - rho) < 0.05);
    Eigen::MatrixXd self = Xk.transpose() * Xk / n;
    CHECK(std::abs(self(0, 0) - 1.0) < 0.05);
    CHECK(std::abs(self(0, 1) - rho) < 0.05);
  }

  SUBCASE("deterministic given the seed") {
    Eigen::MatrixXd X = ar1_design(30, 3, 0.25, rng);
    MomentEstimate m = estimate_moments(X);
    KnockoffModel model{m.mu, m.sigma, equicorrelated_s(m.sigma)};
    std::mt19937_64 r1(7), r2(7);
    CHECK(sample_knockoffs(X, model, r1) == sample_knockoffs(X, model, r2));
  }

  SUBCASE("dimension mismatch rejected") {
    Eigen::MatrixXd X = ar1_design(10, 3, 0.0, rng);
    KnockoffModel model{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                        Eigen::VectorXd::Ones(2)};
    CHECK_THROWS_AS(sample_knockoffs(X, model, rng), std::invalid_argument);
  }
}
