#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adages/selection_set.hpp"

namespace adages {

/// Parameters of the synthetic sparse linear model y = X beta + eps with an
/// AR(1) design, plus the distributed-run shape (machine count and seed).
struct LinearModelSpec {
  int n = 0;               // total sample size across machines
  int d = 0;               // feature dimension
  int s = 0;               // support size |S|
  double rho = 0.25;       // AR(1) correlation, 0 <= rho < 1
  double amplitude = 2.0;  // nonzero coefficients are +-amplitude
  int k = 1;               // number of machines
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// True coefficient vector and its support.
struct GroundTruth {
  std::vector<double> beta;
  SelectionSet support{0};
};

/// Full design/response pair before sharding.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

/// One machine's contiguous block of rows.
struct DatasetShard {
  int machine_id = 0;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

/// n i.i.d. rows from N(0, Sigma) with Sigma_ls = rho^|l-s|, generated by the
/// stationary AR(1) recursion x_l = rho x_{l-1} + sqrt(1-rho^2) z_l.
Eigen::MatrixXd ar1_design(int n, int d, double rho, std::mt19937_64& rng);

/// Draws one instance: design, ground truth (uniform support, i.i.d. +-
/// amplitude signs), and response with standard normal noise.
std::pair<Dataset, GroundTruth> gen_instance(const LinearModelSpec& spec,
                                             std::mt19937_64& rng);

/// Splits rows into k contiguous blocks of size floor(n/k), the first
/// n mod k blocks taking one extra row. Throws when k > n or k < 1.
std::vector<DatasetShard> partition(const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, int k);

/// Writes the instance as CSV: header x1..xd,y then row-major data rows.
void write_instance_csv(const std::string& path, const Dataset& data);

}  // namespace adages
