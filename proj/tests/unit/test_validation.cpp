#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "hazardsim/error.hpp"
#include "hazardsim/validation.hpp"
#include "oracles.hpp"

using namespace hazardsim;

namespace {

// Pairwise Mann-Whitney count, computed directly.
double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("make_folds examples") {
  SUBCASE("n = 100, k = 10") {
    const auto plan = validation::make_folds(100, 10, 1);
    for (std::size_t f = 0; f < 10; ++f) CHECK(plan.test_rows(f).size() == 10);
  }
  SUBCASE("n = 103, k = 10") {
    const auto plan = validation::make_folds(103, 10, 1);
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < 10; ++f) sizes.push_back(plan.test_rows(f).size());
    CHECK(std::count(sizes.begin(), sizes.end(), 10u) == 7);
    CHECK(std::count(sizes.begin(), sizes.end(), 11u) == 3);
  }
  SUBCASE("same seed -> same plan; different seed -> different plan") {
    CHECK(validation::make_folds(57, 10, 3).fold_of == validation::make_folds(57, 10, 3).fold_of);
    CHECK(validation::make_folds(57, 10, 3).fold_of != validation::make_folds(57, 10, 4).fold_of);
  }
  CHECK_THROWS_AS(validation::make_folds(5, 10, 1), ValidationError);
  CHECK_THROWS_AS(validation::make_folds(5, 1, 1), ValidationError);
}

TEST_CASE("property: a fold plan is a partition with sizes within one") {
  std::mt19937_64 eng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + eng() % 500;
    const std::size_t k = 2 + eng() % 12;
    std::vector<int> labels(n);
    for (auto& l : labels) l = eng() % 3 == 0;
    labels[0] = 1;
    labels[1] = 0;
    labels[2] = 1;
    const bool strat = trial % 2 == 0;
    validation::FoldPlan plan;
    try {
      plan = validation::make_folds(n, k, eng(), labels, strat);
    } catch (const ValidationError&) {
      continue;  // legitimately impossible class layouts
    }
    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const auto test = plan.test_rows(f);
      const auto train = plan.train_rows(f);
      CHECK(test.size() + train.size() == n);
      lo = std::min(lo, test.size());
      hi = std::max(hi, test.size());
      for (auto i : test) ++seen[i];
      int pos = 0;
      for (auto i : train) pos += labels[i];
      CHECK(pos > 0);
      CHECK(pos < static_cast<int>(train.size()));
    }
    CHECK(hi - lo <= 1);
    for (int s : seen) CHECK(s == 1);
  }
}

TEST_CASE("make_folds: impossible class layout fails after reseeding") {
  std::vector<int> labels(30, 0);
  labels[4] = 1;
  CHECK_THROWS_AS(validation::make_folds(30, 10, 1, labels), ValidationError);
}

TEST_CASE("auc examples") {
  CHECK(validation::auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) == 1.0);
  CHECK(validation::auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<int>{1, 0, 1, 0}) == 0.5);
  CHECK(validation::auc(std::vector<double>{0.6, 0.4, 0.6}, std::vector<int>{1, 0, 0}) == 0.75);
  CHECK_THROWS_AS(validation::auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ValidationError);
  CHECK_THROWS_AS(validation::auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ValidationError);
}

TEST_CASE("property: auc agrees with brute force, is rank invariant and complements") {
  std::mt19937_64 eng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + eng() % 60;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = eng() % 2;
      // Coarse rounding on some trials produces ties.
      s[i] = trial % 3 == 0 ? std::round(2 * z(eng)) : z(eng) + 0.5 * y[i];
    }
    y[0] = 1;
    y[1] = 0;
    const double a = validation::auc(s, y);
    CHECK(a == doctest::Approx(brute_auc(s, y)).epsilon(1e-12));
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3 * s[i]) + 1;
    CHECK(validation::auc(t, y) == doctest::Approx(a).epsilon(1e-12));
    if (trial % 3 != 0) {
      std::vector<int> flipped(n);
      for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
      CHECK(a + validation::auc(s, flipped) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto roc = validation::roc_curve(s, y);
    CHECK(roc.auc == doctest::Approx(a).epsilon(1e-12));
    double trap = 0;
    for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
      CHECK(roc.fpr[i] >= roc.fpr[i - 1]);
      CHECK(roc.tpr[i] >= roc.tpr[i - 1]);
      trap += (roc.fpr[i] - roc.fpr[i - 1]) * (roc.tpr[i] + roc.tpr[i - 1]) / 2;
    }
    CHECK(std::abs(trap - roc.auc) < 1e-12);
    CHECK(roc.fpr.front() == 0.0);
    CHECK(roc.tpr.front() == 0.0);
    CHECK(roc.fpr.back() == 1.0);
    CHECK(roc.tpr.back() == 1.0);
  }
}

TEST_CASE("error plot binning") {
  CHECK(validation::error_plot_bin(0.5) == 9);  // bin 10 of 20
  CHECK(validation::error_plot_bin(0.0) == 0);
  CHECK(validation::error_plot_bin(1.0) == 19);
  CHECK(validation::error_plot_bin(0.051) == 1);
  CHECK(validation::error_plot_bin(0.05) == 0);

  const std::vector<double> mean = {0.01, 0.5, 0.52, 0.97};
  const std::vector<double> zero(4, 0.0);
  const auto plot = validation::error_plot_table(mean, zero);
  REQUIRE(plot.bins.size() == 20);
  for (const auto& b : plot.bins) {
    if (b.count > 0) CHECK(b.median_width == 0.0);
    else CHECK(std::isnan(b.median_width));
  }
  CHECK(plot.bins[9].count == 1);
  CHECK(plot.bins[10].count == 1);
  CHECK_THROWS_AS(validation::error_plot_table(mean, std::vector<double>{0.1}), ValidationError);
  CHECK_THROWS_AS(validation::error_plot_table(std::vector<double>{0.5}, std::vector<double>{-0.1}), ValidationError);
  CHECK(validation::median({3, 1, 2}) == 2);
  CHECK(validation::median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("error plot of a Gaussian latent posterior peaks in central bins") {
  // eta_u ~ N(m_u, 0.5^2): width of the 95% interval on the probability scale.
  std::vector<double> mean, width;
  for (int i = 0; i < 2000; ++i) {
    const double m = -6.0 + 12.0 * i / 1999.0;
    const double lo = oracle::sigmoid(m - 1.96 * 0.5);
    const double hi = oracle::sigmoid(m + 1.96 * 0.5);
    mean.push_back(oracle::sigmoid(m));
    width.push_back(hi - lo);
  }
  const auto plot = validation::error_plot_table(mean, width);
  std::size_t argmax = 0;
  for (std::size_t b = 0; b < plot.bins.size(); ++b) {
    if (plot.bins[b].median_width > plot.bins[argmax].median_width) argmax = b;
  }
  CHECK(argmax >= 8);
  CHECK(argmax <= 11);
}

namespace {

SlopeUnitTable cv_table(std::size_t n, const std::vector<double>& beta, std::uint64_t seed) {
  const auto d = oracle::simulate_logistic(n, 0.0, beta, seed);
  return oracle::make_table(d.x, d.y);
}

gam::GamOptions fixed_only(const SlopeUnitTable& t) {
  gam::GamOptions o;
  o.fixed = t.column_names();
  return o;
}

}  // namespace

TEST_CASE("cross_validate: null band, signal, and full out-of-fold coverage") {
  SUBCASE("pure noise") {
    const auto t = cv_table(1000, {0, 0, 0, 0}, 1);
    const auto plan = validation::make_folds(t.n_units(), 10, 3, t.labels());
    const auto r = validation::cross_validate(fixed_only(t), t, plan);
    CHECK(r.median_auc >= 0.40);
    CHECK(r.median_auc <= 0.60);
    CHECK(r.out_of_fold.size() == t.n_units());
    for (double v : r.out_of_fold) CHECK(std::isfinite(v));
  }
  SUBCASE("strong signal") {
    const auto t = cv_table(1000, {1.5, -1.5, 1.5, 1.5}, 2);
    const auto plan = validation::make_folds(t.n_units(), 10, 3, t.labels());
    const auto r = validation::cross_validate(fixed_only(t), t, plan);
    CHECK(r.median_auc > 0.75);
    REQUIRE(r.fold_auc.size() == 10);
  }
}

TEST_CASE("cross_validate: thread count and fold relabeling leave predictions unchanged") {
  const auto t = cv_table(400, {1.0, -0.5}, 4);
  auto plan = validation::make_folds(t.n_units(), 5, 8, t.labels());
  validation::CvOptions one;
  one.threads = 1;
  validation::CvOptions three;
  three.threads = 3;
  const auto a = validation::cross_validate(fixed_only(t), t, plan, one);
  const auto b = validation::cross_validate(fixed_only(t), t, plan, three);
  CHECK(a.out_of_fold == b.out_of_fold);
  CHECK(a.fold_auc == b.fold_auc);
  auto relabeled = plan;
  for (auto& f : relabeled.fold_of) f = static_cast<int>(plan.k) - 1 - f;
  const auto c = validation::cross_validate(fixed_only(t), t, relabeled, one);
  CHECK(c.out_of_fold == a.out_of_fold);
}

TEST_CASE("cross_validate: failing fold is named") {
  const auto t = cv_table(100, {1.0}, 5);
  auto plan = validation::make_folds(t.n_units(), 5, 8);
  gam::GamOptions o;
  o.fixed = {"x1"};
  o.smooths = {"missing"};
  CHECK_THROWS_WITH(validation::cross_validate(o, t, plan), doctest::Contains("fold"));
}
