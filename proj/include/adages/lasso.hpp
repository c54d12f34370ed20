#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace adages {

/// Coordinate-descent settings. Convergence is declared when the largest
/// coefficient change in a sweep drops below tol.
struct LassoOptions {
  double tol = 1e-7;
  int max_sweeps = 10000;
  bool record_objective = false;
};

/// Raised when coordinate descent exhausts max_sweeps; carries the last
/// sweep's maximum coefficient change.
class LassoNonConvergence : public std::runtime_error {
 public:
  explicit LassoNonConvergence(double change);
  double last_change() const { return last_change_; }

 private:
  double last_change_;
};

/// Design standardized to centered columns with unit variance (divisor n) and
/// centered response, as coordinate descent expects. Zero-variance columns
/// keep scale 1 and stay identically zero.
struct StandardizedDesign {
  Eigen::MatrixXd Z;
  Eigen::VectorXd y;
  Eigen::VectorXd col_mean;
  Eigen::VectorXd col_scale;
  double y_mean = 0.0;
};

StandardizedDesign standardize(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);

/// (1/2n) ||y - Z b||^2 + lambda ||b||_1.
double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);

/// Largest violation of the subgradient stationarity conditions at beta.
double kkt_violation(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda);

struct LassoFit {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  int sweeps = 0;
  std::vector<double> objective_trace;  // per sweep, when recorded
};

/// Cyclic coordinate descent with an active-set inner loop on a standardized
/// design (columns mean 0 / variance 1, y centered). warm, when given, seeds
/// the iterate.
LassoFit lasso_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                   double lambda, const LassoOptions& opts = {},
                   const Eigen::VectorXd* warm = nullptr);

/// Log-spaced grid of `size` values from lambda_max (smallest lambda with an
/// all-zero solution) down to ratio * lambda_max, decreasing.
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& Z,
                                        const Eigen::VectorXd& y,
                                        int size = 50, double ratio = 0.01);

/// How cross-validation picks a lambda from the error curve: the exact
/// minimizer, or the largest lambda whose error stays within one standard
/// error of the minimum (the usual sparser "1-SE" choice).
enum class CvRule { MinError, OneStdErr };

struct CvResult {
  double best_lambda = 0.0;
  std::vector<double> cv_error;  // mean over folds of validation MSE, aligned with the grid
  std::vector<double> cv_se;     // standard error of that mean across folds
};

/// K-fold cross-validated prediction error over the grid; folds are assigned
/// by row index modulo `folds` so repeated runs agree. Ties prefer the
/// earlier (larger) lambda.
CvResult cross_validate_lambda(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                               const std::vector<double>& grid, int folds,
                               const LassoOptions& opts = {},
                               CvRule rule = CvRule::MinError);

}  // namespace adages
