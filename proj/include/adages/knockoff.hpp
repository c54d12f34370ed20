#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace adages {

/// Sample moments with a ridge floor keeping the covariance positive
/// definite. Columns whose raw sample variance was zero are listed in
/// floored_columns (they carry only the floor variance).
struct MomentEstimate {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  std::vector<int> floored_columns;
};

/// Sample mean and unbiased sample covariance (divisor n-1), inflated by
/// delta * I with delta chosen so the smallest eigenvalue is at least
/// 1e-6 * mean(diagonal). Throws on non-finite input or n < 2.
MomentEstimate estimate_moments(const Eigen::MatrixXd& X);

/// James-Stein-type shrinkage of the sample correlation toward the identity
/// (Schafer-Strimmer); the data-driven intensity rises as n falls relative to
/// d, which keeps the construction usable on shards with n close to d.
struct ShrunkCovariance {
  Eigen::MatrixXd sigma;
  double intensity = 0.0;  // lambda-hat in [0, 1]
};

/// Applies correlation shrinkage to a base covariance using the raw data to
/// estimate the intensity, then re-applies the ridge floor rule.
ShrunkCovariance shrink_covariance(const Eigen::MatrixXd& X,
                                   const MomentEstimate& base);

/// Equicorrelated knockoff diagonal: on the correlation scale every entry is
/// min(1, 2 lambda_min(corr)), scaled back by the covariance diagonal.
/// Throws when sigma is not positive definite.
Eigen::VectorXd equicorrelated_s(const Eigen::MatrixXd& sigma);

/// Second-order Gaussian knockoff sampler parameters.
struct KnockoffModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd s;

  /// Checks symmetry (1e-10), s >= 0, and positive semidefiniteness of the
  /// conditional covariance 2 diag(s) - diag(s) sigma^-1 diag(s).
  void validate() const;
};

/// Draws knockoffs row by row from the Gaussian conditional
/// N(x - (x - mu) sigma^-1 diag(s), 2 diag(s) - diag(s) sigma^-1 diag(s)).
/// Tiny negative eigenvalues of the conditional covariance are clipped;
/// beyond tolerance the construction fails.
Eigen::MatrixXd sample_knockoffs(const Eigen::MatrixXd& X,
                                 const KnockoffModel& model,
                                 std::mt19937_64& rng);

}  // namespace adages
