#pragma once

#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adages/data_gen.hpp"
#include "adages/lasso.hpp"
#include "adages/selection_set.hpp"

namespace adages {

/// Knockoff feature statistics W_j = |beta_j| - |beta_{j+d}| from a Lasso fit
/// on the augmented design, antisymmetric under swapping a feature with its
/// knockoff.
struct WStats {
  Eigen::VectorXd w;
  double lambda_used = 0.0;
};

/// Fits the standardized augmented design [X, Xk] with coordinate descent at
/// a 5-fold cross-validated lambda from the grid, using the one-standard-error
/// rule (largest lambda within one SE of the CV minimum). Features whose
/// knockoff column is bit-identical to the original get W_j = 0 (the swap is
/// the identity there, so antisymmetry leaves zero as the only consistent
/// value).
WStats lasso_w_stats(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xk,
                     const Eigen::VectorXd& y,
                     const std::vector<double>& lambda_grid,
                     const LassoOptions& opts = {});

/// Knockoff+ data-dependent threshold at level q:
/// T = min{ t in {|W_j| : W_j != 0} : (1 + #{W_j <= -t}) / max(1, #{W_j >= t}) <= q }.
/// Returns (+inf, empty set) when no candidate qualifies.
std::pair<double, SelectionSet> knockoff_plus_threshold(const WStats& stats,
                                                        double q);

/// One machine's full controlled-selection pipeline on its shard: moment
/// estimation (with shrinkage sized to the shard), equicorrelated knockoffs,
/// Lasso statistics, knockoff+ threshold. Deterministic given the rng state.
SelectionSet machine_select(const DatasetShard& shard, double q,
                            std::mt19937_64& rng);

}  // namespace adages
