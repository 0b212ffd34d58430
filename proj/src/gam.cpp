#include "hazardsim/gam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "hazardsim/error.hpp"
#include "hazardsim/rng.hpp"

namespace hazardsim::gam {

double inverse_logit(double eta) noexcept {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

std::vector<double> default_log_precision_grid() {
  std::vector<double> grid(15);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = -2.0 + 10.0 * static_cast<double>(k) / 14.0;
  return grid;
}

void GamSpec::validate() const {
  if (fixed.empty() && smooths.empty()) throw ValidationError("model needs at least one fixed or smooth term");
  std::set<std::string> names;
  for (const auto& f : fixed) {
    if (!names.insert(f).second) throw ValidationError("covariate '" + f + "' listed twice");
  }
  for (const auto& s : smooths) {
    if (!names.insert(s.covariate).second) {
      throw ValidationError("covariate '" + s.covariate + "' cannot be both fixed and smooth (or repeated)");
    }
    if (s.n_classes() < 3) throw ValidationError("smooth '" + s.covariate + "' needs at least 3 classes");
  }
  if (!(fixed_precision >= 0) || !(intercept_precision >= 0)) {
    throw ValidationError("prior precisions must be nonnegative");
  }
  if (!smooths.empty() && log_precision_grid.empty()) throw ValidationError("empty hyperparameter grid");
}

std::size_t GamSpec::n_coefficients() const {
  std::size_t p = 1 + fixed.size();
  for (const auto& s : smooths) p += s.n_classes();
  return p;
}

GamSpec make_spec(const GamOptions& options, const SlopeUnitTable& training) {
  GamSpec spec;
  spec.fixed = options.fixed;
  spec.fixed_precision = options.fixed_precision;
  spec.intercept_precision = options.intercept_precision;
  spec.log_precision_grid = options.log_precision_grid;
  for (const auto& name : options.smooths) {
    spec.smooths.push_back(make_bins(training.column(name), options.bins, name, options.binning));
  }
  spec.validate();
  return spec;
}

std::vector<ColumnInfo> column_map(const GamSpec& spec) {
  std::vector<ColumnInfo> cols;
  cols.push_back({TermKind::kIntercept, "(intercept)", 0});
  for (const auto& f : spec.fixed) cols.push_back({TermKind::kFixed, f, 0});
  for (const auto& s : spec.smooths) {
    for (std::size_t k = 0; k < s.n_classes(); ++k) cols.push_back({TermKind::kSmooth, s.covariate, k});
  }
  return cols;
}

Eigen::MatrixXd rw1_structure(std::size_t n_classes) {
  const auto k = static_cast<Eigen::Index>(n_classes);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k - 1, k);
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    d(i, i) = -1.0;
    d(i, i + 1) = 1.0;
  }
  return d.transpose() * d;
}

Eigen::MatrixXd sum_to_zero_basis(std::size_t n_classes) {
  const auto k = static_cast<Eigen::Index>(n_classes);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(k, k - 1);
  for (Eigen::Index j = 1; j < k; ++j) {
    const double norm = std::sqrt(static_cast<double>(j * (j + 1)));
    for (Eigen::Index i = 0; i < j; ++i) z(i, j - 1) = 1.0 / norm;
    z(j, j - 1) = -static_cast<double>(j) / norm;
  }
  return z;
}

Eigen::MatrixXd constraint_basis(const GamSpec& spec) {
  const auto p = static_cast<Eigen::Index>(spec.n_coefficients());
  const auto q = static_cast<Eigen::Index>(spec.n_reduced());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, q);
  const auto linear = static_cast<Eigen::Index>(1 + spec.fixed.size());
  t.topLeftCorner(linear, linear).setIdentity();
  Eigen::Index row = linear;
  Eigen::Index col = linear;
  for (const auto& s : spec.smooths) {
    const auto k = static_cast<Eigen::Index>(s.n_classes());
    t.block(row, col, k, k - 1) = sum_to_zero_basis(s.n_classes());
    row += k;
    col += k - 1;
  }
  return t;
}

Eigen::MatrixXd penalty_matrix(const GamSpec& spec, std::span<const double> smooth_log_precisions) {
  if (smooth_log_precisions.size() != spec.smooths.size()) {
    throw ValidationError("need one log-precision per smooth term");
  }
  const auto p = static_cast<Eigen::Index>(spec.n_coefficients());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, p);
  q(0, 0) = spec.intercept_precision;
  const auto m = static_cast<Eigen::Index>(spec.fixed.size());
  for (Eigen::Index j = 1; j <= m; ++j) q(j, j) = spec.fixed_precision;
  Eigen::Index offset = 1 + m;
  for (std::size_t s = 0; s < spec.smooths.size(); ++s) {
    const auto k = static_cast<Eigen::Index>(spec.smooths[s].n_classes());
    q.block(offset, offset, k, k) = std::exp(smooth_log_precisions[s]) * rw1_structure(spec.smooths[s].n_classes());
    offset += k;
  }
  return q;
}

ModelMatrix build_design(const GamSpec& spec, const StandardizedDesign& design, const SlopeUnitTable& raw) {
  const auto n = static_cast<Eigen::Index>(raw.n_units());
  if (design.matrix.rows() != n) throw ValidationError("standardized design and table differ in row count");
  ModelMatrix out;
  out.matrix = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(spec.n_coefficients()));
  out.matrix.col(0).setOnes();
  Eigen::Index col = 1;
  for (const auto& f : spec.fixed) out.matrix.col(col++) = design.matrix.col(static_cast<Eigen::Index>(design.column_index(f)));
  for (const auto& s : spec.smooths) {
    auto values = raw.column(s.covariate);
    for (Eigen::Index i = 0; i < n; ++i) {
      bool clamped = false;
      const std::size_t k = s.class_index(values[static_cast<std::size_t>(i)], &clamped);
      out.clamped += clamped;
      out.matrix(i, col + static_cast<Eigen::Index>(k)) = 1.0;
    }
    col += static_cast<Eigen::Index>(s.n_classes());
  }
  return out;
}

namespace {

double log1pexp(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

void check_sizes(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::MatrixXd& penalty,
                 Eigen::Index dim) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ValidationError("design rows and label count differ");
  if (penalty.rows() != x.cols() || penalty.cols() != x.cols()) throw ValidationError("penalty has wrong shape");
  if (dim != x.cols()) throw ValidationError("coefficient vector has wrong length");
}

double loglik(const Eigen::VectorXd& eta, std::span<const int> labels) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += labels[static_cast<std::size_t>(i)] * eta[i] - log1pexp(eta[i]);
  return ll;
}

/// log det of the penalty restricted to its positive-diagonal rows/columns.
double penalized_subspace_logdet(const Eigen::MatrixXd& q) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (q(i, i) > 0) idx.push_back(i);
  }
  if (idx.empty()) return 0.0;
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = q(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) throw ConvergenceError("prior precision is not positive definite on its penalized subspace");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double penalized_loglik(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::MatrixXd& penalty,
                        const Eigen::VectorXd& theta) {
  check_sizes(x, labels, penalty, theta.size());
  return loglik(x * theta, labels) - 0.5 * theta.dot(penalty * theta);
}

Eigen::VectorXd penalized_gradient(const Eigen::MatrixXd& x, std::span<const int> labels,
                                   const Eigen::MatrixXd& penalty, const Eigen::VectorXd& theta) {
  check_sizes(x, labels, penalty, theta.size());
  const Eigen::VectorXd eta = x * theta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = labels[static_cast<std::size_t>(i)] - inverse_logit(eta[i]);
  return x.transpose() * resid - penalty * theta;
}

Eigen::MatrixXd negative_hessian(const Eigen::MatrixXd& x, const Eigen::MatrixXd& penalty,
                                 const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = x * theta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = inverse_logit(eta[i]);
    w[i] = p * (1.0 - p);
  }
  Eigen::MatrixXd h = penalty;
  h.selfadjointView<Eigen::Lower>().rankUpdate((x.array().colwise() * w.array().sqrt()).matrix().transpose());
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  return h;
}

ModeResult fit_mode(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::MatrixXd& penalty,
                    const Eigen::VectorXd& init, const ModeOptions& options) {
  const Eigen::Index q = x.cols();
  Eigen::VectorXd theta = init.size() == 0 ? Eigen::VectorXd::Zero(q) : init;
  check_sizes(x, labels, penalty, theta.size());

  double lp = penalized_loglik(x, labels, penalty, theta);
  for (int it = 0; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd grad = penalized_gradient(x, labels, penalty, theta);
    Eigen::MatrixXd h = negative_hessian(x, penalty, theta);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("negative Hessian is not positive definite (is the model identifiable?)");
    }
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (gmax < options.gradient_tolerance) {
      ModeResult r;
      r.mode = theta;
      r.neg_hessian = std::move(h);
      r.log_posterior = lp;
      r.loglik = lp + 0.5 * theta.dot(penalty * theta);
      r.iterations = it;
      return r;
    }
    if (it == options.max_iterations) {
      std::ostringstream msg;
      msg << "mode search did not converge in " << options.max_iterations
          << " Newton steps (gradient max-norm " << gmax << ")";
      throw ConvergenceError(msg.str());
    }
    const Eigen::VectorXd step = llt.solve(grad);
    double scale = 1.0;
    Eigen::VectorXd candidate = theta + step;
    double candidate_lp = penalized_loglik(x, labels, penalty, candidate);
    const double slack = 1e-12 * (1.0 + std::abs(lp));
    for (int halving = 0; halving < 50 && !(candidate_lp >= lp - slack); ++halving) {
      scale *= 0.5;
      candidate = theta + scale * step;
      candidate_lp = penalized_loglik(x, labels, penalty, candidate);
    }
    theta = std::move(candidate);
    lp = candidate_lp;
  }
  throw ConvergenceError("mode search did not converge");
}

FitContext make_fit_context(const GamSpec& spec, const ModelMatrix& model, std::span<const int> labels) {
  FitContext ctx;
  ctx.spec = &spec;
  ctx.basis = constraint_basis(spec);
  ctx.reduced_matrix = model.matrix * ctx.basis;
  ctx.labels = labels;
  return ctx;
}

double laplace_log_marginal(const ModeResult& fit, const Eigen::MatrixXd& reduced_penalty) {
  Eigen::LLT<Eigen::MatrixXd> llt(fit.neg_hessian);
  if (llt.info() != Eigen::Success) throw ConvergenceError("negative Hessian is not positive definite");
  const double logdet_h = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return fit.log_posterior + 0.5 * penalized_subspace_logdet(reduced_penalty) - 0.5 * logdet_h;
}

HyperparameterResult select_hyperparameters(const FitContext& context, std::span<const double> grid) {
  const GamSpec& spec = *context.spec;
  const std::size_t s = spec.smooths.size();
  HyperparameterResult out;
  if (s == 0) {
    out.grid_points.emplace_back();
  } else {
    if (grid.empty()) throw ValidationError("empty hyperparameter grid");
    std::size_t total = 1;
    for (std::size_t a = 0; a < s; ++a) total *= grid.size();
    // Mixed-radix decode; the last smooth varies fastest.
    for (std::size_t g = 0; g < total; ++g) {
      std::vector<double> point(s);
      std::size_t rest = g;
      for (std::size_t a = s; a-- > 0;) {
        point[a] = grid[rest % grid.size()];
        rest /= grid.size();
      }
      out.grid_points.push_back(std::move(point));
    }
  }

  out.log_marginal.assign(out.grid_points.size(), std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd warm;
  bool any = false;
  std::string last_error;
  for (std::size_t g = 0; g < out.grid_points.size(); ++g) {
    const Eigen::MatrixXd reduced_penalty =
        context.basis.transpose() * penalty_matrix(spec, out.grid_points[g]) * context.basis;
    try {
      ModeResult fit = fit_mode(context.reduced_matrix, context.labels, reduced_penalty, warm);
      out.log_marginal[g] = laplace_log_marginal(fit, reduced_penalty);
      warm = fit.mode;
      if (!any || out.log_marginal[g] > out.log_marginal[out.best]) {
        out.best = g;
        out.best_fit = std::move(fit);
      }
      any = true;
    } catch (const ConvergenceError& e) {
      last_error = e.what();
    }
  }
  if (!any) throw ConvergenceError("no hyperparameter grid point converged: " + last_error);
  return out;
}

GamPosterior GamPosterior::from_factor(Eigen::VectorXd mode, Eigen::MatrixXd lower_factor) {
  GamPosterior p;
  p.covariance = lower_factor * lower_factor.transpose();
  p.basis = Eigen::MatrixXd::Identity(mode.size(), mode.size());
  p.factor = std::move(lower_factor);
  p.mode = std::move(mode);
  return p;
}

Eigen::MatrixXd standard_normals(std::size_t n_draws, std::size_t dim, std::uint64_t seed, std::size_t first_draw) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n_draws), static_cast<Eigen::Index>(dim));
  for (std::size_t d = 0; d < n_draws; ++d) {
    auto engine = rng::make_engine(seed, first_draw + d);
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < dim; ++j) z(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = normal(engine);
  }
  return z;
}

Eigen::MatrixXd sample_posterior(const GamPosterior& posterior, std::size_t n_draws, std::uint64_t seed,
                                 std::size_t first_draw) {
  if (n_draws < 1) throw ValidationError("n_draws must be at least 1");
  const Eigen::MatrixXd transform = posterior.draw_transform();
  const Eigen::MatrixXd z = standard_normals(n_draws, static_cast<std::size_t>(transform.cols()), seed, first_draw);
  Eigen::MatrixXd draws = z * transform.transpose();
  draws.rowwise() += posterior.mode.transpose();
  return draws;
}

GamModel fit_gam(const GamSpec& spec, const SlopeUnitTable& training, const FitOptions& options) {
  spec.validate();
  GamModel model;
  model.spec = spec;
  model.n_training = training.n_units();
  model.scaler = fit_scaler(training, spec.fixed);
  const StandardizedDesign design = apply_scaler(model.scaler, training);
  const ModelMatrix mm = build_design(spec, design, training);
  const FitContext ctx = make_fit_context(spec, mm, training.labels());

  HyperparameterResult hyper;
  if (!options.fixed_log_precisions.empty() || spec.smooths.empty()) {
    if (options.fixed_log_precisions.size() != spec.smooths.size()) {
      throw ValidationError("need one fixed log-precision per smooth term");
    }
    const Eigen::MatrixXd reduced_penalty =
        ctx.basis.transpose() * penalty_matrix(spec, options.fixed_log_precisions) * ctx.basis;
    hyper.grid_points.push_back(options.fixed_log_precisions);
    hyper.best_fit = fit_mode(ctx.reduced_matrix, ctx.labels, reduced_penalty, {}, options.mode);
    hyper.log_marginal.push_back(laplace_log_marginal(hyper.best_fit, reduced_penalty));
  } else {
    hyper = select_hyperparameters(ctx, spec.log_precision_grid);
  }

  GamPosterior& post = model.posterior;
  post.basis = ctx.basis;
  post.mode = ctx.basis * hyper.best_fit.mode;
  const Eigen::Index q = hyper.best_fit.neg_hessian.rows();
  const Eigen::MatrixXd reduced_cov = hyper.best_fit.neg_hessian.llt().solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::LLT<Eigen::MatrixXd> cov_llt(0.5 * (reduced_cov + reduced_cov.transpose()));
  if (cov_llt.info() != Eigen::Success) throw ConvergenceError("posterior covariance is not positive definite");
  post.factor = cov_llt.matrixL();
  post.covariance = ctx.basis * post.factor * post.factor.transpose() * ctx.basis.transpose();
  post.covariance = 0.5 * (post.covariance + post.covariance.transpose()).eval();
  post.smooth_log_precisions = hyper.grid_points[hyper.best];
  post.grid_points = std::move(hyper.grid_points);
  post.log_marginal = std::move(hyper.log_marginal);
  post.columns = column_map(spec);
  return model;
}

ModelMatrix model_design(const GamModel& model, const SlopeUnitTable& table) {
  const StandardizedDesign design = apply_scaler(model.scaler, table);
  return build_design(model.spec, design, table);
}

std::vector<double> predict_mode(const GamModel& model, const SlopeUnitTable& table) {
  const ModelMatrix mm = model_design(model, table);
  const Eigen::VectorXd eta = mm.matrix * model.posterior.mode;
  std::vector<double> p(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) p[static_cast<std::size_t>(i)] = inverse_logit(eta[i]);
  return p;
}

}  // namespace hazardsim::gam
