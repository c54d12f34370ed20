#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "adages/data_gen.hpp"
#include "adages/knockoff.hpp"
#include "adages/metrics.hpp"
#include "adages/selector.hpp"

using namespace adages;

namespace {

WStats stats_of(std::vector<double> w) {
  WStats s;
  s.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return s;
}

// A shard drawn from the standard simulation design.
DatasetShard make_shard(int n, int d, int s, double amplitude, std::uint64_t seed) {
  LinearModelSpec spec{.n = n, .d = d, .s = std::max(s, 1), .rho = 0.25,
                       .amplitude = amplitude, .k = 1, .seed = seed};
  std::mt19937_64 rng(seed);
  auto [data, truth] = gen_instance(spec, rng);
  if (s == 0) {
    // Null model: regenerate the response as pure noise.
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) data.y(i) = normal(rng);
  }
  return {0, std::move(data.X), std::move(data.y)};
}

SelectionSet truth_of(int n, int d, int s, std::uint64_t seed) {
  LinearModelSpec spec{.n = n, .d = d, .s = s, .rho = 0.25, .amplitude = 2.0,
                       .k = 1, .seed = seed};
  std::mt19937_64 rng(seed);
  return gen_instance(spec, rng).second.support;
}

}  // namespace

TEST_CASE("knockoff+ threshold on worked examples") {
  SUBCASE("mixed signs at q = 0.5") {
    auto [t, sel] = knockoff_plus_threshold(stats_of({3, -1, 2, -2, 5}), 0.5);
    CHECK(t == doctest::Approx(3.0));
    CHECK(sel.members() == std::vector<int>{0, 4});
  }

  SUBCASE("all negative selects nothing") {
    auto [t, sel] = knockoff_plus_threshold(stats_of({-1, -2, -0.5}), 0.3);
    CHECK(std::isinf(t));
    CHECK(sel.empty());
  }

  SUBCASE("all positive at matching q selects everything") {
    auto [t, sel] = knockoff_plus_threshold(stats_of({5, 4, 3, 2, 1}), 0.2);
    CHECK(t == doctest::Approx(1.0));
    CHECK(sel.members() == std::vector<int>{0, 1, 2, 3, 4});
  }

  SUBCASE("zeros never enter the candidate set") {
    auto [t, sel] = knockoff_plus_threshold(stats_of({0, 0, 0}), 0.5);
    CHECK(std::isinf(t));
    CHECK(sel.empty());
  }

  SUBCASE("level validation") {
    CHECK_THROWS_AS(knockoff_plus_threshold(stats_of({1}), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(knockoff_plus_threshold(stats_of({1}), 1.0), std::invalid_argument);
  }

  SUBCASE("selection grows with q") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> w(20);
      for (double& x : w) x = normal(rng);
      WStats s = stats_of(w);
      auto [t1, sel1] = knockoff_plus_threshold(s, 0.1);
      auto [t2, sel2] = knockoff_plus_threshold(s, 0.4);
      auto [t3, sel3] = knockoff_plus_threshold(s, 0.8);
      CHECK(sel1.is_subset_of(sel2));
      CHECK(sel2.is_subset_of(sel3));
      CHECK(t1 >= t2);
      CHECK(t2 >= t3);
    }
  }
}

TEST_CASE("lasso W statistics") {
  SUBCASE("null response gives identically zero W") {
    std::mt19937_64 rng(8);
    Eigen::MatrixXd X = ar1_design(80, 6, 0.25, rng);
    Eigen::MatrixXd Xk = ar1_design(80, 6, 0.25, rng);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(80);
    WStats w = lasso_w_stats(X, Xk, y, {0.5, 0.1, 0.02});
    CHECK(w.w.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("swapping a feature with its knockoff flips that W") {
    std::mt19937_64 rng(15);
    Eigen::MatrixXd X = ar1_design(200, 5, 0.0, rng);
    Eigen::MatrixXd Xk = ar1_design(200, 5, 0.0, rng);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);
    beta(0) = 2.0;
    beta(2) = -1.5;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd y = X * beta;
    for (int i = 0; i < 200; ++i) y(i) += normal(rng);

    // Fixed single-lambda grid keeps cross-validation from retargeting.
    std::vector<double> grid{0.05};
    WStats base = lasso_w_stats(X, Xk, y, grid);
    Eigen::MatrixXd Xs = X, Xks = Xk;
    Xs.col(2).swap(Xks.col(2));
    WStats swapped = lasso_w_stats(Xs, Xks, y, grid);
    CHECK(swapped.w(2) == doctest::Approx(-base.w(2)).epsilon(1e-4));
    for (int j = 0; j < 5; ++j) {
      if (j != 2) CHECK(swapped.w(j) == doctest::Approx(base.w(j)).epsilon(1e-4));
    }
  }

  SUBCASE("bit-identical knockoff column pins W at zero") {
    std::mt19937_64 rng(16);
    Eigen::MatrixXd X = ar1_design(100, 4, 0.0, rng);
    Eigen::MatrixXd Xk = ar1_design(100, 4, 0.0, rng);
    Xk.col(1) = X.col(1);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(4);
    beta(1) = 2.0;
    Eigen::VectorXd y = X * beta;
    WStats w = lasso_w_stats(X, Xk, y, {0.1, 0.05});
    CHECK(w.w(1) == 0.0);
  }

  SUBCASE("strong signal earns a positive W almost always") {
    int positive = 0;
    for (int rep = 0; rep < 100; ++rep) {
      std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(rep));
      Eigen::MatrixXd X = ar1_design(500, 5, 0.0, rng);
      Eigen::MatrixXd Xk = ar1_design(500, 5, 0.0, rng);
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);
      beta(0) = 2.0;
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::VectorXd y = X * beta;
      for (int i = 0; i < 500; ++i) y(i) += normal(rng);
      Eigen::MatrixXd aug(500, 10);
      aug << X, Xk;
      StandardizedDesign sd = standardize(aug, y);
      WStats w = lasso_w_stats(X, Xk, y, default_lambda_grid(sd.Z, sd.y, 20, 0.05));
      if (w.w(0) > 0.0) ++positive;
    }
    CHECK(positive >= 95);
  }

  SUBCASE("shape validation") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 3);
    Eigen::MatrixXd Xk = Eigen::MatrixXd::Zero(10, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
    CHECK_THROWS_AS(lasso_w_stats(X, Xk, y, {0.1}), std::invalid_argument);
    CHECK_THROWS_AS(lasso_w_stats(X, X, y, {}), std::invalid_argument);
  }
}

TEST_CASE("machine selection pipeline") {
  SUBCASE("deterministic given the seed") {
    DatasetShard shard = make_shard(120, 10, 3, 2.0, 77);
    std::mt19937_64 r1(5), r2(5);
    SelectionSet a = machine_select(shard, 0.2, r1);
    SelectionSet b = machine_select(shard, 0.2, r2);
    CHECK(a == b);
  }

  SUBCASE("validation") {
    DatasetShard shard = make_shard(50, 5, 2, 2.0, 1);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(machine_select(shard, 0.0, rng), std::invalid_argument);
    DatasetShard tiny{0, Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1)};
    CHECK_THROWS_AS(machine_select(tiny, 0.2, rng), std::invalid_argument);
  }

  SUBCASE("null model keeps the empirical FDR near the target") {
    int reps = 200;
    double fdp_sum = 0.0;
    SelectionSet null_truth(20);
    for (int rep = 0; rep < reps; ++rep) {
      DatasetShard shard = make_shard(200, 20, 0, 2.0, 5000 + static_cast<std::uint64_t>(rep));
      std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(rep));
      SelectionSet sel = machine_select(shard, 0.2, rng);
      fdp_sum += fdp(sel, null_truth);
    }
    CHECK(fdp_sum / reps <= 0.25);
  }

  SUBCASE("strong signals are mostly recovered") {
    int reps = 200;
    double tpp_sum = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t seed = 20000 + static_cast<std::uint64_t>(rep);
      DatasetShard shard = make_shard(200, 20, 5, 2.0, seed);
      SelectionSet truth = truth_of(200, 20, 5, seed);
      std::mt19937_64 rng(30000 + static_cast<std::uint64_t>(rep));
      SelectionSet sel = machine_select(shard, 0.2, rng);
      tpp_sum += tpp(sel, truth);
    }
    CHECK(tpp_sum / reps >= 0.6);
  }
}
