#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hazardsim/core_data.hpp"
#include "hazardsim/gam.hpp"

namespace hazardsim::validation {

/// Exact partition of units into k folds (fold ids are zero-based).
struct FoldPlan {
  std::vector<int> fold_of;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::uint64_t attempt = 0;  // reseed attempt that produced this plan

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

/// Permutation-based partition with fold sizes differing by at most one.
/// When `labels` is non-empty, every training complement must hold both
/// classes; the permutation is redrawn up to 100 times before a
/// ValidationError. `stratified` deals each class round-robin so every fold
/// gets its share of presences.
FoldPlan make_folds(std::size_t n_units, std::size_t k, std::uint64_t seed,
                    std::span<const int> labels = {}, bool stratified = false);

/// Mann-Whitney estimate P(s+ > s-) + P(s+ == s-)/2. Throws ValidationError
/// unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

struct RocCurve {
  std::vector<double> thresholds;  // decreasing; point i uses "score >= thresholds[i]"
  std::vector<double> fpr;         // starts at 0, ends at 1
  std::vector<double> tpr;
  double auc = 0.0;
};

/// ROC points at every distinct score, with the trapezoidal area (which equals
/// the Mann-Whitney statistic under the half-tie convention).
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

struct CvOptions {
  /// Reuse these smooth log-precisions instead of re-running the grid search
  /// in each fold. Empty means full per-fold search.
  std::vector<double> fixed_log_precisions;
  std::size_t threads = 1;
};

struct CvResult {
  std::vector<RocCurve> folds;
  std::vector<double> fold_auc;
  double median_auc = 0.0;
  std::vector<double> out_of_fold;  // susceptibility at the posterior mode, one per unit
  std::vector<std::size_t> clamped;  // per fold: test values clamped to an edge class
};

/// Refits scaler, bins and GAM on each training split and scores the held-out
/// fold. Out-of-fold predictions are reassembled in table row order.
CvResult cross_validate(const gam::GamOptions& options, const SlopeUnitTable& table, const FoldPlan& plan,
                        const CvOptions& cv = {});

struct ErrorPlotBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double median_width = 0.0;  // NaN for an empty bin
};

struct ErrorPlot {
  std::vector<double> mean;
  std::vector<double> width;
  std::vector<ErrorPlotBin> bins;
};

inline constexpr std::size_t kErrorPlotBins = 20;

/// Zero-based bin of a mean susceptibility: ceil(mean * 20) - 1, with 0
/// falling in the first bin (bins are closed on the right).
std::size_t error_plot_bin(double mean, std::size_t n_bins = kErrorPlotBins);

ErrorPlot error_plot_table(std::span<const double> mean, std::span<const double> ci_width,
                           std::size_t n_bins = kErrorPlotBins);

/// Median with the midpoint convention for even counts.
double median(std::vector<double> values);

}  // namespace hazardsim::validation
