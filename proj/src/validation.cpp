#include "hazardsim/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hazardsim/error.hpp"
#include "hazardsim/parallel.hpp"
#include "hazardsim/rng.hpp"

namespace hazardsim::validation {

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == static_cast<int>(fold)) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != static_cast<int>(fold)) rows.push_back(i);
  }
  return rows;
}

FoldPlan make_folds(std::size_t n_units, std::size_t k, std::uint64_t seed, std::span<const int> labels,
                    bool stratified) {
  if (k < 2) throw ValidationError("need at least 2 folds");
  if (n_units < k) throw ValidationError("fewer units than folds");
  if (!labels.empty() && labels.size() != n_units) throw ValidationError("label count differs from unit count");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(n_units, 0);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    auto engine = rng::make_engine(seed, attempt);
    std::vector<std::size_t> order(n_units);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), engine);
    if (stratified && !labels.empty()) {
      std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return labels[i] == 1; });
    }
    for (std::size_t pos = 0; pos < n_units; ++pos) plan.fold_of[order[pos]] = static_cast<int>(pos % k);
    plan.attempt = attempt;
    if (labels.empty()) return plan;

    std::vector<std::size_t> size(k, 0);
    std::vector<std::size_t> pos_in(k, 0);
    std::size_t total_pos = 0;
    for (std::size_t i = 0; i < n_units; ++i) {
      ++size[static_cast<std::size_t>(plan.fold_of[i])];
      pos_in[static_cast<std::size_t>(plan.fold_of[i])] += static_cast<std::size_t>(labels[i]);
      total_pos += static_cast<std::size_t>(labels[i]);
    }
    bool ok = true;
    for (std::size_t f = 0; f < k && ok; ++f) {
      const std::size_t train_n = n_units - size[f];
      const std::size_t train_pos = total_pos - pos_in[f];
      ok = train_pos > 0 && train_pos < train_n;
    }
    if (ok) return plan;
  }
  throw ValidationError("stratification failure: no fold plan with both classes in every training split after 100 attempts");
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of mid-ranks of the positives.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        rank_sum += mid_rank;
        ++n_pos;
      } else if (labels[order[t]] != 0) {
        throw ValidationError("labels must be 0 or 1");
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("AUC needs both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y == 1;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("ROC needs both classes");

  RocCurve roc;
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  double area = 0.0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    const double f = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double t = static_cast<double>(tp) / static_cast<double>(n_pos);
    area += (f - roc.fpr.back()) * (t + roc.tpr.back()) / 2.0;
    roc.thresholds.push_back(scores[order[i]]);
    roc.fpr.push_back(f);
    roc.tpr.push_back(t);
    i = j;
  }
  roc.auc = area;
  return roc;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

CvResult cross_validate(const gam::GamOptions& options, const SlopeUnitTable& table, const FoldPlan& plan,
                        const CvOptions& cv) {
  if (plan.fold_of.size() != table.n_units()) throw ValidationError("fold plan does not match table size");
  const std::size_t k = plan.k;
  CvResult out;
  out.folds.resize(k);
  out.fold_auc.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.clamped.assign(k, 0);
  out.out_of_fold.assign(table.n_units(), std::numeric_limits<double>::quiet_NaN());

  parallel_for(k, cv.threads, [&](std::size_t f, std::size_t) {
    try {
      const auto train_rows = plan.train_rows(f);
      const auto test_rows = plan.test_rows(f);
      if (test_rows.empty()) throw ValidationError("empty test fold");
      const SlopeUnitTable train = table.subset(train_rows);
      const SlopeUnitTable test = table.subset(test_rows);
      const gam::GamSpec spec = gam::make_spec(options, train);
      gam::FitOptions fit_options;
      fit_options.fixed_log_precisions = cv.fixed_log_precisions;
      const gam::GamModel model = gam::fit_gam(spec, train, fit_options);
      const gam::ModelMatrix mm = gam::model_design(model, test);
      out.clamped[f] = mm.clamped;
      const Eigen::VectorXd eta = mm.matrix * model.posterior.mode;
      std::vector<double> scores(test_rows.size());
      for (std::size_t r = 0; r < test_rows.size(); ++r) {
        scores[r] = gam::inverse_logit(eta[static_cast<Eigen::Index>(r)]);
        out.out_of_fold[test_rows[r]] = scores[r];
      }
      const auto& y = test.labels();
      const bool both = std::find(y.begin(), y.end(), 0) != y.end() && std::find(y.begin(), y.end(), 1) != y.end();
      if (both) {
        out.folds[f] = roc_curve(scores, y);
        out.fold_auc[f] = out.folds[f].auc;
      }
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("fold " + std::to_string(f + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw ValidationError("fold " + std::to_string(f + 1) + ": " + e.what());
    }
  });

  std::vector<double> defined;
  for (double a : out.fold_auc) {
    if (!std::isnan(a)) defined.push_back(a);
  }
  out.median_auc = median(defined);
  return out;
}

std::size_t error_plot_bin(double mean, std::size_t n_bins) {
  const double scaled = std::ceil(mean * static_cast<double>(n_bins));
  if (scaled <= 1.0) return 0;
  return std::min(static_cast<std::size_t>(scaled) - 1, n_bins - 1);
}

ErrorPlot error_plot_table(std::span<const double> mean, std::span<const double> ci_width, std::size_t n_bins) {
  if (mean.size() != ci_width.size()) throw ValidationError("mean and width vectors differ in length");
  if (n_bins == 0) throw ValidationError("need at least one bin");
  ErrorPlot plot;
  plot.mean.assign(mean.begin(), mean.end());
  plot.width.assign(ci_width.begin(), ci_width.end());
  std::vector<std::vector<double>> members(n_bins);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!(mean[i] >= 0.0 && mean[i] <= 1.0)) throw ValidationError("mean susceptibility outside [0,1]");
    if (!(ci_width[i] >= 0.0)) throw ValidationError("negative credible-interval width");
    members[error_plot_bin(mean[i], n_bins)].push_back(ci_width[i]);
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    ErrorPlotBin bin;
    bin.lower = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.upper = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    bin.count = members[b].size();
    bin.median_width = median(std::move(members[b]));
    plot.bins.push_back(bin);
  }
  return plot;
}

}  // namespace hazardsim::validation
