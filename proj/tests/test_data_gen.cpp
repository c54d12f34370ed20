#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "adages/data_gen.hpp"

using namespace adages;

namespace {

double column_corr(const Eigen::MatrixXd& X, int a, int b) {
  Eigen::VectorXd xa = X.col(a).array() - X.col(a).mean();
  Eigen::VectorXd xb = X.col(b).array() - X.col(b).mean();
  return xa.dot(xb) / std::sqrt(xa.squaredNorm() * xb.squaredNorm());
}

}  // namespace

TEST_CASE("spec validation") {
  LinearModelSpec ok{.n = 100, .d = 10, .s = 3, .rho = 0.25, .amplitude = 2.0, .k = 4, .seed = 1};
  CHECK_NOTHROW(ok.validate());

  LinearModelSpec bad = ok;
  bad.s = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.s = 11;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.rho = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.rho = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.n = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("ar1 design reproduces the target correlations") {
  std::mt19937_64 rng(42);
  Eigen::MatrixXd X0 = ar1_design(5000, 6, 0.0, rng);
  CHECK(X0.rows() == 5000);
  CHECK(X0.cols() == 6);
  CHECK(std::abs(column_corr(X0, 0, 1)) < 0.05);
  CHECK(std::abs(column_corr(X0, 2, 5)) < 0.05);

  Eigen::MatrixXd X = ar1_design(5000, 6, 0.25, rng);
  CHECK(column_corr(X, 0, 1) == doctest::Approx(0.25).epsilon(0.2));
  CHECK(std::abs(column_corr(X, 0, 1) - 0.25) < 0.05);
  CHECK(std::abs(column_corr(X, 0, 2) - 0.0625) < 0.05);
  CHECK(std::abs(column_corr(X, 1, 2) - 0.25) < 0.05);

  // Columns keep unit marginal variance under the stationary recursion.
  const double var0 = (X.col(0).array() - X.col(0).mean()).square().mean();
  const double var5 = (X.col(5).array() - X.col(5).mean()).square().mean();
  CHECK(std::abs(var0 - 1.0) < 0.1);
  CHECK(std::abs(var5 - 1.0) < 0.1);

  CHECK_THROWS_AS(ar1_design(0, 3, 0.2, rng), std::invalid_argument);
  CHECK_THROWS_AS(ar1_design(10, 3, 1.0, rng), std::invalid_argument);
}

TEST_CASE("instance generation honors the model") {
  LinearModelSpec spec{.n = 5000, .d = 12, .s = 4, .rho = 0.25, .amplitude = 2.0, .k = 2, .seed = 7};
  std::mt19937_64 rng(spec.seed);
  auto [data, truth] = gen_instance(spec, rng);

  CHECK(data.X.rows() == 5000);
  CHECK(data.X.cols() == 12);
  CHECK(data.y.size() == 5000);
  CHECK(truth.support.size() == 4);
  REQUIRE(truth.beta.size() == 12);
  for (int j = 0; j < 12; ++j) {
    const double b = truth.beta[static_cast<std::size_t>(j)];
    if (truth.support.contains(j)) {
      CHECK(std::abs(b) == doctest::Approx(2.0));
    } else {
      CHECK(b == 0.0);
    }
  }

  // Residual noise is standard normal.
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(truth.beta.data(), 12);
  Eigen::VectorXd resid = data.y - data.X * beta;
  CHECK(std::abs(resid.mean()) < 0.05);
  CHECK(std::abs(resid.squaredNorm() / 5000.0 - 1.0) < 0.1);
}

TEST_CASE("full support leaves no zero coefficients") {
  LinearModelSpec spec{.n = 50, .d = 6, .s = 6, .rho = 0.0, .amplitude = 2.0, .k = 1, .seed = 3};
  std::mt19937_64 rng(spec.seed);
  auto [data, truth] = gen_instance(spec, rng);
  for (double b : truth.beta) CHECK(std::abs(b) == doctest::Approx(2.0));
  CHECK(truth.support.size() == 6);
}

TEST_CASE("generation is deterministic per seed") {
  LinearModelSpec spec{.n = 200, .d = 8, .s = 3, .rho = 0.25, .amplitude = 2.0, .k = 2, .seed = 11};
  std::mt19937_64 r1(spec.seed), r2(spec.seed), r3(spec.seed + 1);
  auto [d1, t1] = gen_instance(spec, r1);
  auto [d2, t2] = gen_instance(spec, r2);
  auto [d3, t3] = gen_instance(spec, r3);
  CHECK(d1.X == d2.X);
  CHECK(d1.y == d2.y);
  CHECK(t1.support == t2.support);
  CHECK(t1.beta == t2.beta);
  CHECK(d1.X != d3.X);
}

TEST_CASE("partition into contiguous near-equal shards") {
  Eigen::MatrixXd X(7, 2);
  for (int i = 0; i < 7; ++i) {
    X(i, 0) = i;
    X(i, 1) = 10 + i;
  }
  Eigen::VectorXd y(7);
  for (int i = 0; i < 7; ++i) y(i) = 100 + i;

  auto shards = partition(X, y, 3);
  REQUIRE(shards.size() == 3);
  CHECK(shards[0].X.rows() == 3);
  CHECK(shards[1].X.rows() == 2);
  CHECK(shards[2].X.rows() == 2);
  CHECK(shards[0].machine_id == 0);
  CHECK(shards[2].machine_id == 2);
  // Disjoint cover in original order.
  CHECK(shards[0].X(0, 0) == 0);
  CHECK(shards[1].X(0, 0) == 3);
  CHECK(shards[2].X(0, 0) == 5);
  CHECK(shards[2].y(1) == 106);

  auto even = partition(Eigen::MatrixXd::Zero(1000, 2), Eigen::VectorXd::Zero(1000), 5);
  for (const auto& s : even) CHECK(s.X.rows() == 200);
  auto ten = partition(Eigen::MatrixXd::Zero(1000, 2), Eigen::VectorXd::Zero(1000), 10);
  for (const auto& s : ten) CHECK(s.X.rows() == 100);

  CHECK_THROWS_AS(partition(X, y, 8), std::invalid_argument);
  CHECK_THROWS_AS(partition(X, y, 0), std::invalid_argument);
  Eigen::VectorXd bad_y(6);
  bad_y.setZero();
  CHECK_THROWS_AS(partition(X, bad_y, 2), std::invalid_argument);
}

TEST_CASE("instance CSV export") {
  LinearModelSpec spec{.n = 5, .d = 3, .s = 1, .rho = 0.0, .amplitude = 2.0, .k = 1, .seed = 9};
  std::mt19937_64 rng(spec.seed);
  auto [data, truth] = gen_instance(spec, rng);
  const std::string path = "test_instance_out.csv";
  write_instance_csv(path, data);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,x3,y");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 5);
  in.close();
  std::remove(path.c_str());
}
