#include "adages/data_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace adages {

void LinearModelSpec::validate() const {
  if (n < 1) throw std::invalid_argument("LinearModelSpec: n must be >= 1");
  if (d < 1) throw std::invalid_argument("LinearModelSpec: d must be >= 1");
  if (s < 1 || s > d) throw std::invalid_argument("LinearModelSpec: need 1 <= s <= d");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("LinearModelSpec: need 0 <= rho < 1");
  }
  if (amplitude <= 0.0) throw std::invalid_argument("LinearModelSpec: amplitude must be > 0");
  if (k < 1) throw std::invalid_argument("LinearModelSpec: k must be >= 1");
  if (n < k) throw std::invalid_argument("LinearModelSpec: need n >= k");
}

Eigen::MatrixXd ar1_design(int n, int d, double rho, std::mt19937_64& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("ar1_design: n and d must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("ar1_design: need 0 <= rho < 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  const double scale = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    double prev = normal(rng);
    X(i, 0) = prev;
    for (int l = 1; l < d; ++l) {
      prev = rho * prev + scale * normal(rng);
      X(i, l) = prev;
    }
  }
  return X;
}

std::pair<Dataset, GroundTruth> gen_instance(const LinearModelSpec& spec,
                                             std::mt19937_64& rng) {
  spec.validate();
  Dataset data;
  data.X = ar1_design(spec.n, spec.d, spec.rho, rng);

  // Support drawn uniformly without replacement via a partial Fisher-Yates
  // shuffle, then i.i.d. signs on the nonzeros.
  std::vector<int> pool(static_cast<std::size_t>(spec.d));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> support;
  support.reserve(static_cast<std::size_t>(spec.s));
  for (int t = 0; t < spec.s; ++t) {
    std::uniform_int_distribution<int> pick(t, spec.d - 1);
    std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(pick(rng))]);
    support.push_back(pool[static_cast<std::size_t>(t)]);
  }

  GroundTruth truth;
  truth.beta.assign(static_cast<std::size_t>(spec.d), 0.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int j : support) {
    truth.beta[static_cast<std::size_t>(j)] = coin(rng) ? spec.amplitude : -spec.amplitude;
  }
  truth.support = SelectionSet::from_indices(spec.d, std::move(support));

  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(
      truth.beta.data(), static_cast<Eigen::Index>(truth.beta.size()));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(spec.n);
  for (int i = 0; i < spec.n; ++i) eps(i) = normal(rng);
  data.y = data.X * beta + eps;
  return {std::move(data), std::move(truth)};
}

std::vector<DatasetShard> partition(const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, int k) {
  const int n = static_cast<int>(X.rows());
  if (y.size() != n) throw std::invalid_argument("partition: X and y row counts differ");
  if (k < 1) throw std::invalid_argument("partition: k must be >= 1");
  if (k > n) throw std::invalid_argument("partition: more machines than rows");
  std::vector<DatasetShard> shards;
  shards.reserve(static_cast<std::size_t>(k));
  const int base = n / k;
  const int extra = n % k;
  int row = 0;
  for (int i = 0; i < k; ++i) {
    const int rows = base + (i < extra ? 1 : 0);
    shards.push_back({i, X.middleRows(row, rows), y.segment(row, rows)});
    row += rows;
  }
  return shards;
}

void write_instance_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_instance_csv: cannot open " + path);
  const int n = static_cast<int>(data.X.rows());
  const int d = static_cast<int>(data.X.cols());
  for (int j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  char buf[32];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.10g", data.X(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.10g", data.y(i));
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write_instance_csv: write failed for " + path);
}

}  // namespace adages
