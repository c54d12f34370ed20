#include "adages/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adages {

LassoNonConvergence::LassoNonConvergence(double change)
    : std::runtime_error("lasso coordinate descent did not converge; last sweep changed coefficients by " +
                         std::to_string(change)),
      last_change_(change) {}

StandardizedDesign standardize(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
  const auto n = Z.rows();
  const auto p = Z.cols();
  if (y.size() != n) throw std::invalid_argument("standardize: row count mismatch");
  if (n < 2) throw std::invalid_argument("standardize: need at least two rows");
  StandardizedDesign out;
  out.col_mean = Z.colwise().mean().transpose();
  out.Z = Z.rowwise() - out.col_mean.transpose();
  out.col_scale.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = out.Z.col(j).squaredNorm() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    out.col_scale(j) = sd > 1e-12 ? sd : 1.0;
    out.Z.col(j) /= out.col_scale(j);
  }
  out.y_mean = y.mean();
  out.y = y.array() - out.y_mean;
  return out;
}

double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
  const double n = static_cast<double>(Z.rows());
  return (y - Z * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

double kkt_violation(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda) {
  const double n = static_cast<double>(Z.rows());
  Eigen::VectorXd g = Z.transpose() * (y - Z * beta) / n;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double v;
    if (beta(j) > 0.0) {
      v = std::abs(g(j) - lambda);
    } else if (beta(j) < 0.0) {
      v = std::abs(g(j) + lambda);
    } else {
      v = std::max(0.0, std::abs(g(j)) - lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

LassoFit lasso_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                   double lambda, const LassoOptions& opts,
                   const Eigen::VectorXd* warm) {
  const auto n = Z.rows();
  const auto p = Z.cols();
  if (y.size() != n) throw std::invalid_argument("lasso_fit: row count mismatch");
  if (lambda < 0.0) throw std::invalid_argument("lasso_fit: negative lambda");
  const double inv_n = 1.0 / static_cast<double>(n);

  LassoFit fit;
  fit.lambda = lambda;
  if (warm) {
    if (warm->size() != p) throw std::invalid_argument("lasso_fit: warm start size mismatch");
    fit.beta = *warm;
  } else {
    fit.beta = Eigen::VectorXd::Zero(p);
  }

  Eigen::VectorXd a(p);  // a_j = (1/n) ||z_j||^2; zero columns never move
  for (Eigen::Index j = 0; j < p; ++j) a(j) = Z.col(j).squaredNorm() * inv_n;

  Eigen::VectorXd r = y;
  if (warm && (fit.beta.array() != 0.0).any()) r -= Z * fit.beta;

  std::vector<Eigen::Index> active;
  auto sweep = [&](const std::vector<Eigen::Index>* subset) -> double {
    double max_change = 0.0;
    const Eigen::Index count = subset ? static_cast<Eigen::Index>(subset->size()) : p;
    for (Eigen::Index t = 0; t < count; ++t) {
      const Eigen::Index j = subset ? (*subset)[static_cast<std::size_t>(t)] : t;
      if (a(j) <= 0.0) continue;
      const double old = fit.beta(j);
      const double rho = Z.col(j).dot(r) * inv_n + a(j) * old;
      const double next = soft_threshold(rho, lambda) / a(j);
      if (next != old) {
        r -= (next - old) * Z.col(j);
        fit.beta(j) = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    ++fit.sweeps;
    if (opts.record_objective) {
      fit.objective_trace.push_back(lasso_objective(Z, y, fit.beta, lambda));
    }
    return max_change;
  };

  double last_change = 0.0;
  while (true) {
    if (fit.sweeps >= opts.max_sweeps) throw LassoNonConvergence(last_change);
    last_change = sweep(nullptr);
    if (last_change < opts.tol) return fit;
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (fit.beta(j) != 0.0) active.push_back(j);
    }
    while (true) {
      if (fit.sweeps >= opts.max_sweeps) throw LassoNonConvergence(last_change);
      last_change = sweep(&active);
      if (last_change < opts.tol) break;
    }
  }
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& Z,
                                        const Eigen::VectorXd& y,
                                        int size, double ratio) {
  if (size < 1) throw std::invalid_argument("default_lambda_grid: size must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("default_lambda_grid: ratio must lie in (0,1)");
  }
  const double inv_n = 1.0 / static_cast<double>(Z.rows());
  double lambda_max = (Z.transpose() * y).cwiseAbs().maxCoeff() * inv_n;
  if (lambda_max <= 0.0) lambda_max = 1.0;  // degenerate response: any grid fits zero
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(size));
  if (size == 1) {
    grid.push_back(lambda_max);
    return grid;
  }
  const double step = std::log(ratio) / (size - 1);
  for (int i = 0; i < size; ++i) grid.push_back(lambda_max * std::exp(step * i));
  return grid;
}

CvResult cross_validate_lambda(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                               const std::vector<double>& grid, int folds,
                               const LassoOptions& opts, CvRule rule) {
  const auto n = Z.rows();
  if (grid.empty()) throw std::invalid_argument("cross_validate_lambda: empty grid");
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (!(grid[g] < grid[g - 1])) {
      throw std::invalid_argument("cross_validate_lambda: grid must be strictly decreasing");
    }
  }
  if (folds < 2) throw std::invalid_argument("cross_validate_lambda: need at least 2 folds");
  if (n < folds) throw std::invalid_argument("cross_validate_lambda: more folds than rows");

  std::vector<std::vector<double>> fold_mse(
      static_cast<std::size_t>(folds), std::vector<double>(grid.size(), 0.0));
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, val;
    for (Eigen::Index i = 0; i < n; ++i) {
      (i % folds == f ? val : train).push_back(i);
    }
    Eigen::MatrixXd Zt(train.size(), Z.cols());
    Eigen::VectorXd yt(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      Zt.row(static_cast<Eigen::Index>(i)) = Z.row(train[i]);
      yt(static_cast<Eigen::Index>(i)) = y(train[i]);
    }
    Eigen::MatrixXd Zv(val.size(), Z.cols());
    Eigen::VectorXd yv(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) {
      Zv.row(static_cast<Eigen::Index>(i)) = Z.row(val[i]);
      yv(static_cast<Eigen::Index>(i)) = y(val[i]);
    }
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(Z.cols());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      LassoFit fit = lasso_fit(Zt, yt, grid[g], opts, &warm);
      warm = fit.beta;
      fold_mse[static_cast<std::size_t>(f)][g] =
          (yv - Zv * fit.beta).squaredNorm() / static_cast<double>(val.size());
    }
  }

  CvResult out;
  out.cv_error.assign(grid.size(), 0.0);
  out.cv_se.assign(grid.size(), 0.0);
  const double k = static_cast<double>(folds);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double mean = 0.0;
    for (int f = 0; f < folds; ++f) mean += fold_mse[static_cast<std::size_t>(f)][g];
    mean /= k;
    double var = 0.0;
    for (int f = 0; f < folds; ++f) {
      const double dev = fold_mse[static_cast<std::size_t>(f)][g] - mean;
      var += dev * dev;
    }
    var /= (k - 1.0);
    out.cv_error[g] = mean;
    out.cv_se[g] = std::sqrt(var / k);
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < out.cv_error.size(); ++g) {
    if (out.cv_error[g] < out.cv_error[best]) best = g;
  }
  if (rule == CvRule::OneStdErr) {
    const double limit = out.cv_error[best] + out.cv_se[best];
    for (std::size_t g = 0; g <= best; ++g) {
      if (out.cv_error[g] <= limit) {
        best = g;  // grid decreases, so the first qualifying index is the largest lambda
        break;
      }
    }
  }
  out.best_lambda = grid[best];
  return out;
}

}  // namespace adages
