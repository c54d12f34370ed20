#include "adages/knockoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adages {

namespace {

constexpr double kRidgeRel = 1e-6;

// Raises sigma by delta * I so its smallest eigenvalue reaches the floor
// 1e-6 * mean(diagonal) (absolute 1e-6 when the diagonal is all zero).
void apply_ridge_floor(Eigen::MatrixXd& sigma) {
  const double mean_diag = sigma.diagonal().mean();
  const double target = mean_diag > 0.0 ? kRidgeRel * mean_diag : kRidgeRel;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (lambda_min < target) {
    sigma.diagonal().array() += target - lambda_min;
  }
}

}  // namespace

MomentEstimate estimate_moments(const Eigen::MatrixXd& X) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) throw std::invalid_argument("estimate_moments: need at least two rows");
  if (!X.allFinite()) throw std::invalid_argument("estimate_moments: non-finite input");

  MomentEstimate out;
  out.mu = X.colwise().mean().transpose();
  Eigen::MatrixXd centered = X.rowwise() - out.mu.transpose();
  out.sigma = centered.transpose() * centered / static_cast<double>(n - 1);
  out.sigma = ((out.sigma + out.sigma.transpose()) / 2.0).eval();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (out.sigma(j, j) <= 0.0) out.floored_columns.push_back(static_cast<int>(j));
  }
  apply_ridge_floor(out.sigma);
  return out;
}

ShrunkCovariance shrink_covariance(const Eigen::MatrixXd& X,
                                   const MomentEstimate& base) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) throw std::invalid_argument("shrink_covariance: need at least two rows");
  if (base.sigma.rows() != d) {
    throw std::invalid_argument("shrink_covariance: moment dimension mismatch");
  }
  ShrunkCovariance out;
  if (d == 1) {
    out.sigma = base.sigma;
    return out;
  }

  // Standardize with the raw sample scale; zero-variance columns contribute
  // nothing to either sum and keep zero correlation.
  Eigen::MatrixXd Z = X.rowwise() - X.colwise().mean();
  Eigen::VectorXd sd = (Z.colwise().squaredNorm().transpose() /
                        static_cast<double>(n - 1))
                           .array()
                           .sqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (sd(j) > 0.0) Z.col(j) /= sd(j);
  }

  // r_ij = sum_k z_ki z_kj / (n-1);  Var-hat(r_ij) via the moments of the
  // products w_kij = z_ki z_kj (Schafer & Strimmer 2005, target = identity).
  Eigen::MatrixXd R = Z.transpose() * Z / static_cast<double>(n - 1);
  Eigen::MatrixXd W2 = Z.cwiseProduct(Z).transpose() * Z.cwiseProduct(Z);
  double var_sum = 0.0;
  double r2_sum = 0.0;
  const double nn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double wbar = (nn - 1.0) / nn * R(i, j);
      const double ss = W2(i, j) - nn * wbar * wbar;
      var_sum += nn / ((nn - 1.0) * (nn - 1.0) * (nn - 1.0)) * ss;
      r2_sum += R(i, j) * R(i, j);
    }
  }
  double lambda = r2_sum > 0.0 ? var_sum / r2_sum : 1.0;
  lambda = std::clamp(lambda, 0.0, 1.0);
  out.intensity = lambda;

  Eigen::MatrixXd Rstar = (1.0 - lambda) * R;
  Rstar.diagonal().setOnes();
  Eigen::VectorXd scale = base.sigma.diagonal().array().sqrt();
  out.sigma = scale.asDiagonal() * Rstar * scale.asDiagonal();
  out.sigma = ((out.sigma + out.sigma.transpose()) / 2.0).eval();
  apply_ridge_floor(out.sigma);
  return out;
}

Eigen::VectorXd equicorrelated_s(const Eigen::MatrixXd& sigma) {
  const auto d = sigma.rows();
  if (d == 0 || sigma.cols() != d) {
    throw std::invalid_argument("equicorrelated_s: square nonempty matrix required");
  }
  Eigen::VectorXd diag = sigma.diagonal();
  if ((diag.array() <= 0.0).any()) {
    throw std::invalid_argument("equicorrelated_s: covariance not positive definite");
  }
  Eigen::VectorXd inv_scale = diag.array().rsqrt();
  Eigen::MatrixXd corr = inv_scale.asDiagonal() * sigma * inv_scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (lambda_min <= 0.0) {
    throw std::invalid_argument("equicorrelated_s: covariance not positive definite");
  }
  const double s_corr = std::min(1.0, 2.0 * lambda_min);
  return s_corr * diag;
}

void KnockoffModel::validate() const {
  const auto d = sigma.rows();
  if (mu.size() != d || s.size() != d || sigma.cols() != d) {
    throw std::invalid_argument("KnockoffModel: inconsistent dimensions");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("KnockoffModel: sigma not symmetric");
  }
  if ((s.array() < 0.0).any()) {
    throw std::invalid_argument("KnockoffModel: negative knockoff diagonal");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("KnockoffModel: sigma not positive definite");
  }
  Eigen::MatrixXd sig_inv_s = llt.solve(Eigen::MatrixXd(s.asDiagonal()));
  Eigen::MatrixXd cond = 2.0 * Eigen::MatrixXd(s.asDiagonal()) -
                         s.asDiagonal() * sig_inv_s;
  cond = ((cond + cond.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cond, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, cond.diagonal().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw std::invalid_argument("KnockoffModel: conditional covariance not PSD");
  }
}

Eigen::MatrixXd sample_knockoffs(const Eigen::MatrixXd& X,
                                 const KnockoffModel& model,
                                 std::mt19937_64& rng) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (model.sigma.rows() != d) {
    throw std::invalid_argument("sample_knockoffs: model dimension mismatch");
  }
  model.validate();

  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("sample_knockoffs: sigma not positive definite");
  }
  Eigen::MatrixXd sig_inv_s = llt.solve(Eigen::MatrixXd(model.s.asDiagonal()));
  Eigen::MatrixXd cond = 2.0 * Eigen::MatrixXd(model.s.asDiagonal()) -
                         model.s.asDiagonal() * sig_inv_s;
  cond = ((cond + cond.transpose()) / 2.0).eval();

  // Factor the conditional covariance, clipping eigenvalue noise at zero.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cond);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("sample_knockoffs: eigendecomposition failed");
  }
  const double scale = std::max(1.0, cond.diagonal().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw std::runtime_error("sample_knockoffs: conditional covariance not PSD");
  }
  Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd factor =
      eig.eigenvectors() * clipped.array().sqrt().matrix().asDiagonal();

  Eigen::MatrixXd mean_part =
      X - (X.rowwise() - model.mu.transpose()) * sig_inv_s;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd Zn(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) Zn(i, j) = normal(rng);
  }
  return mean_part + Zn * factor.transpose();
}

}  // namespace adages
