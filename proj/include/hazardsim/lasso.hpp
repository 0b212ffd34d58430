#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hazardsim/core_data.hpp"

namespace hazardsim::lasso {

// L1-penalized logistic regression, glmnet parameterization:
//
//   minimize  -(1/n) sum_i [ y_i eta_i - log(1 + exp(eta_i)) ] + lambda * sum_{j>=1} |beta_j|
//
// with eta = beta_0 + x beta. The intercept is never penalized. Coefficient
// vectors are laid out as [intercept, beta_1, ..., beta_m].

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma) noexcept;

/// Smallest lambda at which the all-zero solution is optimal:
/// max_j |x_j^T (y - ybar)| / n.
double lambda_max(const Eigen::MatrixXd& x, std::span<const int> labels);

struct FitOptions {
  double tolerance = 1e-7;        // max absolute coefficient change between outer steps
  int max_outer_iterations = 10000;
  double inner_tolerance = 1e-10;
  int max_inner_sweeps = 100000;
};

/// IRLS outer loop with cyclic coordinate descent on each weighted
/// least-squares subproblem. `init` may be empty (cold start at the null
/// model). Exactly duplicated columns share their total weight equally, which
/// picks the minimum-norm point of the tied solution set.
/// Throws ConvergenceError after max_outer_iterations.
Eigen::VectorXd fit_lasso_logistic(const Eigen::MatrixXd& x, std::span<const int> labels, double lambda,
                                   const Eigen::VectorXd& init = {}, const FitOptions& options = {});

inline Eigen::VectorXd fit_lasso_logistic(const StandardizedDesign& design, std::span<const int> labels,
                                          double lambda, const Eigen::VectorXd& init = {},
                                          const FitOptions& options = {}) {
  return fit_lasso_logistic(design.matrix, labels, lambda, init, options);
}

/// Geometric sequence from lambda_max down to lambda_max * min_ratio.
std::vector<double> lambda_sequence(double lambda_max, std::size_t length, double min_ratio = 1e-4);

struct LassoPath {
  std::vector<std::string> covariates;
  std::vector<double> lambdas;       // decreasing
  Eigen::MatrixXd coefficients;      // L x (m + 1)
  std::vector<double> cv_auc_mean;
  std::vector<double> cv_auc_sd;
  std::vector<std::size_t> nonzero_counts;
  std::vector<int> fold_of;          // random fold assignment used for CV (0-based)
};

struct PathOptions {
  std::size_t length = 100;
  std::size_t folds = 10;
  double min_ratio = 1e-4;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  FitOptions fit;
};

/// Randomized K-fold CV over a lambda path with warm starts. Each unit is
/// assigned a uniformly random fold; assignments in which a fold is empty or
/// a training split lacks a class are redrawn (up to 100 attempts). Hold-out
/// folds that contain a single class are left out of the AUC mean and sd.
LassoPath lasso_path_cv(const StandardizedDesign& design, std::span<const int> labels,
                        const PathOptions& options = {});

enum class SelectionRule { kConservative, kMaxAuc };

std::string to_string(SelectionRule rule);
SelectionRule parse_rule(std::string_view text);

struct SelectionResult {
  double lambda = 0.0;
  std::size_t index = 0;
  std::vector<std::string> covariates;
  SelectionRule rule = SelectionRule::kConservative;
};

/// kConservative: the largest lambda with nonempty support whose mean AUC is
/// at least (best mean AUC - AUC sd at the best lambda). kMaxAuc: the
/// lambda with the best mean AUC among nonempty supports.
SelectionResult select_covariates(const LassoPath& path, SelectionRule rule = SelectionRule::kConservative);

}  // namespace hazardsim::lasso
