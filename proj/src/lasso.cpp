#include "hazardsim/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hazardsim/error.hpp"
#include "hazardsim/parallel.hpp"
#include "hazardsim/rng.hpp"
#include "hazardsim/validation.hpp"

namespace hazardsim::lasso {

double soft_threshold(double z, double gamma) noexcept {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

namespace {

Eigen::VectorXd label_vector(std::span<const int> labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i];
  return y;
}

double log1pexp(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double expit(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                 double lambda) {
  const Eigen::VectorXd eta = (x * beta.tail(x.cols())).array() + beta[0];
  double nll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) nll += log1pexp(eta[i]) - y[i] * eta[i];
  return nll / static_cast<double>(x.rows()) + lambda * beta.tail(x.cols()).lpNorm<1>();
}

/// Groups of exactly identical columns (each of size > 1).
std::vector<std::vector<Eigen::Index>> duplicate_groups(const Eigen::MatrixXd& x) {
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<bool> used(static_cast<std::size_t>(x.cols()), false);
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    if (used[static_cast<std::size_t>(a)]) continue;
    std::vector<Eigen::Index> g{a};
    for (Eigen::Index b = a + 1; b < x.cols(); ++b) {
      if (!used[static_cast<std::size_t>(b)] && x.col(a) == x.col(b)) {
        g.push_back(b);
        used[static_cast<std::size_t>(b)] = true;
      }
    }
    if (g.size() > 1) groups.push_back(std::move(g));
  }
  return groups;
}

class Solver {
 public:
  Solver(const Eigen::MatrixXd& x, std::span<const int> labels, const FitOptions& options)
      : x_(x), y_(label_vector(labels)), options_(options), duplicates_(duplicate_groups(x)) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
      throw ValidationError("design rows and label count differ");
    }
    const double n = static_cast<double>(x.rows());
    ybar_ = y_.mean();
    null_gradient_ = (x_.transpose() * (y_.array() - ybar_).matrix()).cwiseAbs() / n;
  }

  Eigen::VectorXd null_model() const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(x_.cols() + 1);
    b[0] = std::log(ybar_ / (1.0 - ybar_));
    return b;
  }

  Eigen::VectorXd fit(double lambda, Eigen::VectorXd beta) const {
    const Eigen::Index m = x_.cols();
    const Eigen::Index n_rows = x_.rows();
    const double n = static_cast<double>(n_rows);
    if (lambda < 0) throw ValidationError("lambda must be nonnegative");
    // KKT at the null model: nothing can enter.
    if (m == 0 || null_gradient_.maxCoeff() <= lambda) return null_model();
    if (beta.size() == 0) beta = null_model();
    if (beta.size() != m + 1) throw ValidationError("initial coefficient vector has wrong length");

    Eigen::VectorXd w(n_rows);
    Eigen::VectorXd r(n_rows);
    Eigen::VectorXd xwx(m);
    double last_delta = std::numeric_limits<double>::infinity();
    double current_obj = objective(x_, y_, beta, lambda);
    for (int outer = 0; outer < options_.max_outer_iterations; ++outer) {
      const Eigen::VectorXd eta = (x_ * beta.tail(m)).array() + beta[0];
      for (Eigen::Index i = 0; i < n_rows; ++i) {
        const double p = expit(eta[i]);
        const double wi = std::max(p * (1.0 - p), 1e-5);
        w[i] = wi;
        r[i] = (y_[i] - p) / wi;
      }
      for (Eigen::Index j = 0; j < m; ++j) xwx[j] = w.dot(x_.col(j).cwiseAbs2()) / n;
      const double wsum = w.sum();

      Eigen::VectorXd next = beta;
      for (int sweep = 0; sweep < options_.max_inner_sweeps; ++sweep) {
        double max_change = 0.0;
        const double d0 = w.dot(r) / wsum;
        next[0] += d0;
        r.array() -= d0;
        max_change = std::abs(d0);
        for (Eigen::Index j = 0; j < m; ++j) {
          const double old = next[j + 1];
          const double g = w.cwiseProduct(r).dot(x_.col(j)) / n + xwx[j] * old;
          const double updated = soft_threshold(g, lambda) / xwx[j];
          if (updated != old) {
            r -= (updated - old) * x_.col(j);
            next[j + 1] = updated;
            max_change = std::max(max_change, std::abs(updated - old));
          }
        }
        if (max_change < options_.inner_tolerance) break;
      }

      // Step halving keeps the penalized objective monotone.
      double next_obj = objective(x_, y_, next, lambda);
      for (int halving = 0; halving < 30 && next_obj > current_obj + 1e-15 * std::abs(current_obj); ++halving) {
        next = 0.5 * (next + beta);
        next_obj = objective(x_, y_, next, lambda);
      }
      last_delta = (next - beta).cwiseAbs().maxCoeff();
      beta = std::move(next);
      current_obj = next_obj;
      if (last_delta < options_.tolerance) {
        share_duplicates(beta);
        return beta;
      }
    }
    std::ostringstream msg;
    msg << "lasso fit did not converge in " << options_.max_outer_iterations
        << " outer iterations at lambda=" << lambda << " (last delta " << last_delta << ")";
    throw ConvergenceError(msg.str());
  }

 private:
  void share_duplicates(Eigen::VectorXd& beta) const {
    for (const auto& g : duplicates_) {
      double total = 0.0;
      for (auto j : g) total += beta[j + 1];
      for (auto j : g) beta[j + 1] = total / static_cast<double>(g.size());
    }
  }

  const Eigen::MatrixXd& x_;
  Eigen::VectorXd y_;
  FitOptions options_;
  std::vector<std::vector<Eigen::Index>> duplicates_;
  double ybar_ = 0.0;
  Eigen::VectorXd null_gradient_;
};

std::size_t count_nonzero(const Eigen::VectorXd& beta) {
  std::size_t c = 0;
  for (Eigen::Index j = 1; j < beta.size(); ++j) c += beta[j] != 0.0;
  return c;
}

}  // namespace

double lambda_max(const Eigen::MatrixXd& x, std::span<const int> labels) {
  const Eigen::VectorXd y = label_vector(labels);
  const double ybar = y.mean();
  if (x.cols() == 0) return 0.0;
  return (x.transpose() * (y.array() - ybar).matrix()).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

Eigen::VectorXd fit_lasso_logistic(const Eigen::MatrixXd& x, std::span<const int> labels, double lambda,
                                   const Eigen::VectorXd& init, const FitOptions& options) {
  Solver solver(x, labels, options);
  return solver.fit(lambda, init);
}

std::vector<double> lambda_sequence(double lambda_max, std::size_t length, double min_ratio) {
  if (length == 0) throw ValidationError("lambda path length must be positive");
  if (!(lambda_max > 0)) throw ValidationError("lambda_max must be positive (is some covariate informative?)");
  std::vector<double> lambdas(length);
  if (length == 1) {
    lambdas[0] = lambda_max;
    return lambdas;
  }
  const double step = std::log(min_ratio) / static_cast<double>(length - 1);
  for (std::size_t k = 0; k < length; ++k) lambdas[k] = lambda_max * std::exp(step * static_cast<double>(k));
  lambdas[0] = lambda_max;
  return lambdas;
}

LassoPath lasso_path_cv(const StandardizedDesign& design, std::span<const int> labels,
                        const PathOptions& options) {
  const Eigen::MatrixXd& x = design.matrix;
  const std::size_t n = labels.size();
  const std::size_t folds = options.folds;
  if (static_cast<std::size_t>(x.rows()) != n) throw ValidationError("design rows and label count differ");
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (n < folds) throw ValidationError("fewer units than folds");

  LassoPath path;
  path.covariates = design.column_names;
  path.lambdas = lambda_sequence(lambda_max(x, labels), options.length, options.min_ratio);
  const std::size_t L = path.lambdas.size();
  const Eigen::Index m = x.cols();

  // Full-data path.
  path.coefficients.resize(static_cast<Eigen::Index>(L), m + 1);
  {
    Solver solver(x, labels, options.fit);
    Eigen::VectorXd warm;
    for (std::size_t k = 0; k < L; ++k) {
      warm = solver.fit(path.lambdas[k], warm);
      path.coefficients.row(static_cast<Eigen::Index>(k)) = warm.transpose();
      path.nonzero_counts.push_back(count_nonzero(warm));
    }
  }

  // Purely random fold assignment.
  std::vector<int> fold_of(n);
  bool ok = false;
  for (std::uint64_t attempt = 0; attempt < 100 && !ok; ++attempt) {
    auto engine = rng::make_engine(options.seed, attempt);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(folds) - 1);
    for (auto& f : fold_of) f = pick(engine);
    ok = true;
    for (std::size_t f = 0; f < folds && ok; ++f) {
      std::size_t size = 0;
      std::size_t train_pos = 0;
      std::size_t train_n = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] == static_cast<int>(f)) {
          ++size;
        } else {
          ++train_n;
          train_pos += static_cast<std::size_t>(labels[i]);
        }
      }
      ok = size > 0 && train_pos > 0 && train_pos < train_n;
    }
  }
  if (!ok) throw ValidationError("stratification error: could not draw folds with both classes in every training split after 100 attempts");
  path.fold_of = fold_of;

  // auc_by_fold[f][k]; NaN when the hold-out fold is single-class.
  std::vector<std::vector<double>> auc_by_fold(folds, std::vector<double>(L, std::numeric_limits<double>::quiet_NaN()));
  parallel_for(folds, options.threads, [&](std::size_t f, std::size_t) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == static_cast<int>(f) ? test : train).push_back(i);
    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), m);
    Eigen::MatrixXd x_test(static_cast<Eigen::Index>(test.size()), m);
    std::vector<int> y_train;
    std::vector<int> y_test;
    for (std::size_t r = 0; r < train.size(); ++r) {
      x_train.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(train[r]));
      y_train.push_back(labels[train[r]]);
    }
    int positives = 0;
    for (std::size_t r = 0; r < test.size(); ++r) {
      x_test.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(test[r]));
      y_test.push_back(labels[test[r]]);
      positives += labels[test[r]];
    }
    const bool scorable = positives > 0 && positives < static_cast<int>(test.size());
    Solver solver(x_train, y_train, options.fit);
    Eigen::VectorXd warm;
    std::vector<double> scores(test.size());
    for (std::size_t k = 0; k < L; ++k) {
      warm = solver.fit(path.lambdas[k], warm);
      if (!scorable) continue;
      const Eigen::VectorXd eta = (x_test * warm.tail(m)).array() + warm[0];
      for (std::size_t r = 0; r < test.size(); ++r) scores[r] = eta[static_cast<Eigen::Index>(r)];
      auc_by_fold[f][k] = validation::auc(scores, y_test);
    }
  });

  path.cv_auc_mean.assign(L, std::numeric_limits<double>::quiet_NaN());
  path.cv_auc_sd.assign(L, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < L; ++k) {
    std::vector<double> values;
    for (std::size_t f = 0; f < folds; ++f) {
      if (!std::isnan(auc_by_fold[f][k])) values.push_back(auc_by_fold[f][k]);
    }
    if (values.empty()) continue;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    path.cv_auc_mean[k] = mean;
    path.cv_auc_sd[k] = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  }
  return path;
}

std::string to_string(SelectionRule rule) {
  return rule == SelectionRule::kConservative ? "conservative" : "max-auc";
}

SelectionRule parse_rule(std::string_view text) {
  if (text == "conservative") return SelectionRule::kConservative;
  if (text == "max-auc") return SelectionRule::kMaxAuc;
  throw ValidationError("unknown selection rule '" + std::string(text) + "'");
}

SelectionResult select_covariates(const LassoPath& path, SelectionRule rule) {
  const std::size_t L = path.lambdas.size();
  if (L == 0) throw ValidationError("empty lasso path");
  auto usable = [&](std::size_t k) { return path.nonzero_counts[k] > 0 && !std::isnan(path.cv_auc_mean[k]); };

  std::size_t best = L;
  for (std::size_t k = 0; k < L; ++k) {
    if (std::isnan(path.cv_auc_mean[k])) continue;
    if (rule == SelectionRule::kMaxAuc && !usable(k)) continue;
    if (best == L || path.cv_auc_mean[k] > path.cv_auc_mean[best]) best = k;
  }
  if (best == L) throw ValidationError("no lambda on the path has a nonempty support with a defined AUC");

  std::size_t chosen = L;
  if (rule == SelectionRule::kMaxAuc) {
    chosen = best;
  } else {
    const double threshold = path.cv_auc_mean[best] - path.cv_auc_sd[best];
    for (std::size_t k = 0; k < L && chosen == L; ++k) {
      if (usable(k) && path.cv_auc_mean[k] >= threshold) chosen = k;
    }
    if (chosen == L) {
      for (std::size_t k = 0; k < L && chosen == L; ++k) {
        if (usable(k)) chosen = k;
      }
    }
  }
  if (chosen == L) throw ValidationError("no lambda on the path has a nonempty support");

  SelectionResult out;
  out.lambda = path.lambdas[chosen];
  out.index = chosen;
  out.rule = rule;
  for (std::size_t j = 0; j < path.covariates.size(); ++j) {
    if (path.coefficients(static_cast<Eigen::Index>(chosen), static_cast<Eigen::Index>(j + 1)) != 0.0) {
      out.covariates.push_back(path.covariates[j]);
    }
  }
  return out;
}

}  // namespace hazardsim::lasso
