#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hazardsim/core_data.hpp"

namespace hazardsim::gam {

// Binomial GAM: logit P = b0 + sum_j b_j z_j + sum_s f_s(class_s), with
// standardized linear covariates z_j and first-order random-walk smooths f_s
// over binned raw covariates. The posterior over all coefficients is
// approximated by a Gaussian at the penalized-likelihood mode, with the RW1
// precisions chosen by maximizing the Laplace marginal likelihood over a grid.
//
// Coefficient layout (length p): [intercept | fixed effects | smooth 1 classes
// | smooth 2 classes | ...]. Each smooth block is constrained to sum to zero;
// the constraint is imposed by reparameterizing through an orthonormal basis
// of the sum-to-zero subspace (the "reduced" coordinates, length q).

/// 1 / (1 + exp(-eta)), evaluated without overflow.
double inverse_logit(double eta) noexcept;

/// 15 log-precision values equally spaced over [-2, 8].
std::vector<double> default_log_precision_grid();

/// Model structure as it is fitted: the bins are fixed by the training data.
struct GamSpec {
  std::vector<std::string> fixed;
  std::vector<BinDefinition> smooths;
  double fixed_precision = 1e-3;
  double intercept_precision = 0.0;
  std::vector<double> log_precision_grid = default_log_precision_grid();

  /// Throws ValidationError on overlapping fixed/smooth names, empty model,
  /// negative precisions or an empty grid.
  void validate() const;
  std::size_t n_coefficients() const;
  std::size_t n_reduced() const { return n_coefficients() - smooths.size(); }
};

/// Model structure before bins are known (used to refit per CV split).
struct GamOptions {
  std::vector<std::string> fixed;
  std::vector<std::string> smooths;
  std::size_t bins = kDefaultBins;
  Binning binning = Binning::kEqualWidth;
  double fixed_precision = 1e-3;
  double intercept_precision = 0.0;
  std::vector<double> log_precision_grid = default_log_precision_grid();
};

/// Builds a spec with bins taken from `training`.
GamSpec make_spec(const GamOptions& options, const SlopeUnitTable& training);

enum class TermKind { kIntercept, kFixed, kSmooth };

struct ColumnInfo {
  TermKind kind = TermKind::kIntercept;
  std::string term;
  std::size_t class_index = 0;  // smooth terms only
};

std::vector<ColumnInfo> column_map(const GamSpec& spec);

/// K x K structure matrix D1^T D1 of a first-order random walk.
Eigen::MatrixXd rw1_structure(std::size_t n_classes);

/// K x (K-1) orthonormal basis of {f : sum f = 0} (Helmert contrasts).
Eigen::MatrixXd sum_to_zero_basis(std::size_t n_classes);

/// p x q block-diagonal map from reduced to full coefficients.
Eigen::MatrixXd constraint_basis(const GamSpec& spec);

/// Full p x p prior precision for the given per-smooth RW1 log-precisions.
Eigen::MatrixXd penalty_matrix(const GamSpec& spec, std::span<const double> smooth_log_precisions);

struct ModelMatrix {
  Eigen::MatrixXd matrix;  // n x p: [1 | standardized fixed | one-hot classes]
  std::size_t clamped = 0;  // smooth lookups outside the training range
};

/// `design` must carry the fixed-effect columns; `raw` supplies smooth
/// covariates in native units.
ModelMatrix build_design(const GamSpec& spec, const StandardizedDesign& design, const SlopeUnitTable& raw);

// Penalized Bernoulli log-likelihood  l(theta) - theta^T Q theta / 2  and its
// derivatives, for any design X.
double penalized_loglik(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::MatrixXd& penalty,
                        const Eigen::VectorXd& theta);
Eigen::VectorXd penalized_gradient(const Eigen::MatrixXd& x, std::span<const int> labels,
                                   const Eigen::MatrixXd& penalty, const Eigen::VectorXd& theta);
Eigen::MatrixXd negative_hessian(const Eigen::MatrixXd& x, const Eigen::MatrixXd& penalty,
                                 const Eigen::VectorXd& theta);

struct ModeOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
};

struct ModeResult {
  Eigen::VectorXd mode;
  Eigen::MatrixXd neg_hessian;  // precision of the Gaussian approximation
  double loglik = 0.0;          // unpenalized log-likelihood at the mode
  double log_posterior = 0.0;   // penalized
  int iterations = 0;
};

/// Damped Newton ascent on the penalized log-likelihood. Throws
/// ConvergenceError when the gradient max-norm stays above tolerance after
/// max_iterations or when the negative Hessian is not positive definite.
ModeResult fit_mode(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::MatrixXd& penalty,
                    const Eigen::VectorXd& init = {}, const ModeOptions& options = {});

/// Everything the hyperparameter search needs, in reduced coordinates.
struct FitContext {
  const GamSpec* spec = nullptr;
  Eigen::MatrixXd reduced_matrix;  // X T
  Eigen::MatrixXd basis;           // T
  std::span<const int> labels;
};

FitContext make_fit_context(const GamSpec& spec, const ModelMatrix& model, std::span<const int> labels);

struct HyperparameterResult {
  std::vector<std::vector<double>> grid_points;  // per point: one log-precision per smooth
  std::vector<double> log_marginal;              // NaN where the fit failed
  std::size_t best = 0;
  ModeResult best_fit;                           // reduced coordinates
};

/// Laplace log marginal likelihood of a converged fit at penalty Q_r (reduced):
/// l(mode) - mode^T Q_r mode / 2 + logdet+(Q_r)/2 - logdet(H)/2, where
/// logdet+ runs over the penalized subspace.
double laplace_log_marginal(const ModeResult& fit, const Eigen::MatrixXd& reduced_penalty);

/// Empirical Bayes over the Cartesian product of `grid` (one axis per smooth).
/// With no smooths the single fit is returned. Throws ConvergenceError if no
/// grid point converges.
HyperparameterResult select_hyperparameters(const FitContext& context, std::span<const double> grid);

struct GamPosterior {
  Eigen::VectorXd mode;        // p
  Eigen::MatrixXd covariance;  // p x p, T Sigma_r T^T
  Eigen::MatrixXd basis;       // p x q, T
  Eigen::MatrixXd factor;      // q x q lower triangular, Sigma_r = L L^T
  std::vector<double> smooth_log_precisions;
  std::vector<std::vector<double>> grid_points;
  std::vector<double> log_marginal;
  std::vector<ColumnInfo> columns;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mode.size()); }
  /// p x q matrix A with covariance = A A^T; draws are mode + A z.
  Eigen::MatrixXd draw_transform() const { return basis * factor; }
  Eigen::VectorXd sd() const { return covariance.diagonal().cwiseMax(0.0).cwiseSqrt(); }

  /// Unconstrained Gaussian with a given lower-triangular factor (T = I).
  static GamPosterior from_factor(Eigen::VectorXd mode, Eigen::MatrixXd lower_factor);
};

/// n_draws x p matrix; row d is generated from the stream (seed, first_draw + d),
/// so any partition of draw indices reproduces the same rows.
Eigen::MatrixXd sample_posterior(const GamPosterior& posterior, std::size_t n_draws, std::uint64_t seed,
                                 std::size_t first_draw = 0);

/// Standard normal vectors used by sample_posterior: n_draws x q.
Eigen::MatrixXd standard_normals(std::size_t n_draws, std::size_t dim, std::uint64_t seed,
                                 std::size_t first_draw = 0);

struct GamModel {
  GamSpec spec;
  Scaler scaler;  // fixed-effect columns only
  GamPosterior posterior;
  std::size_t n_training = 0;
};

struct FitOptions {
  /// When non-empty, skip the grid search and use these log-precisions.
  std::vector<double> fixed_log_precisions;
  ModeOptions mode;
};

GamModel fit_gam(const GamSpec& spec, const SlopeUnitTable& training, const FitOptions& options = {});

/// Design of `table` under a fitted model (training scaler, training bins).
ModelMatrix model_design(const GamModel& model, const SlopeUnitTable& table);

/// Susceptibility at the posterior mode.
std::vector<double> predict_mode(const GamModel& model, const SlopeUnitTable& table);

/// Two-sided 95% standard normal quantile.
inline constexpr double kZ975 = 1.959963984540054;

}  // namespace hazardsim::gam
