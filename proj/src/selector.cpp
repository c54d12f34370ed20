#include "adages/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "adages/knockoff.hpp"

namespace adages {

WStats lasso_w_stats(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xk,
                     const Eigen::VectorXd& y,
                     const std::vector<double>& lambda_grid,
                     const LassoOptions& opts) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (Xk.rows() != n || Xk.cols() != d) {
    throw std::invalid_argument("lasso_w_stats: knockoff matrix shape mismatch");
  }
  if (y.size() != n) throw std::invalid_argument("lasso_w_stats: response length mismatch");
  if (lambda_grid.empty()) throw std::invalid_argument("lasso_w_stats: empty lambda grid");

  Eigen::MatrixXd aug(n, 2 * d);
  aug << X, Xk;
  StandardizedDesign std_design = standardize(aug, y);

  CvResult cv =
      cross_validate_lambda(std_design.Z, std_design.y, lambda_grid, 5, opts, CvRule::OneStdErr);
  LassoFit fit = lasso_fit(std_design.Z, std_design.y, cv.best_lambda, opts);

  WStats out;
  out.lambda_used = cv.best_lambda;
  out.w.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if ((X.col(j).array() == Xk.col(j).array()).all()) {
      out.w(j) = 0.0;  // identical pair: swap symmetry pins W_j at zero
    } else {
      out.w(j) = std::abs(fit.beta(j)) - std::abs(fit.beta(j + d));
    }
  }
  return out;
}

std::pair<double, SelectionSet> knockoff_plus_threshold(const WStats& stats,
                                                        double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("knockoff_plus_threshold: q must lie in (0,1)");
  }
  const Eigen::Index d = stats.w.size();
  std::vector<double> candidates;
  candidates.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    const double w = stats.w(j);
    if (!std::isfinite(w)) {
      throw std::invalid_argument("knockoff_plus_threshold: non-finite statistic");
    }
    if (w != 0.0) candidates.push_back(std::abs(w));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double threshold = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    int neg = 0, pos = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (stats.w(j) <= -t) ++neg;
      if (stats.w(j) >= t) ++pos;
    }
    if ((1.0 + neg) / std::max(1, pos) <= q) {
      threshold = t;
      break;
    }
  }

  std::vector<int> selected;
  if (std::isfinite(threshold)) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (stats.w(j) >= threshold) selected.push_back(static_cast<int>(j));
    }
  }
  return {threshold,
          SelectionSet::from_indices(static_cast<int>(d), std::move(selected))};
}

SelectionSet machine_select(const DatasetShard& shard, double q,
                            std::mt19937_64& rng) {
  if (shard.X.rows() < 2) {
    throw std::invalid_argument("machine_select: shard needs at least two rows");
  }
  if (shard.y.size() != shard.X.rows()) {
    throw std::invalid_argument("machine_select: X and y row counts differ");
  }
  if (!shard.X.allFinite() || !shard.y.allFinite()) {
    throw std::invalid_argument("machine_select: non-finite shard data");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("machine_select: q must lie in (0,1)");
  }

  MomentEstimate moments = estimate_moments(shard.X);
  ShrunkCovariance shrunk = shrink_covariance(shard.X, moments);
  KnockoffModel model{moments.mu, shrunk.sigma, equicorrelated_s(shrunk.sigma)};
  Eigen::MatrixXd Xk = sample_knockoffs(shard.X, model, rng);

  Eigen::MatrixXd aug(shard.X.rows(), 2 * shard.X.cols());
  aug << shard.X, Xk;
  StandardizedDesign std_design = standardize(aug, shard.y);
  // Floor the path at 0.05*lambda_max: on wide augmented designs (2d >= n_i)
  // the minimizer is non-unique near zero and coordinate descent stalls there,
  // while the cross-validated choice never lands that low anyway.
  std::vector<double> grid = default_lambda_grid(std_design.Z, std_design.y, 50, 0.05);

  WStats stats = lasso_w_stats(shard.X, Xk, shard.y, grid);
  return knockoff_plus_threshold(stats, q).second;
}

}  // namespace adages
