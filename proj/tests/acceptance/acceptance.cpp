// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hazardsim/config.hpp"
#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"
#include "hazardsim/gam.hpp"
#include "hazardsim/lasso.hpp"
#include "hazardsim/pipeline.hpp"
#include "hazardsim/scenario.hpp"
#include "hazardsim/synth.hpp"
#include "hazardsim/validation.hpp"
#include "oracles.hpp"

using namespace hazardsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Columns rescaled to sample mean 0 and sd 1.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = x;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - m).square().sum() / (n - 1.0));
    z.col(j) = (x.col(j).array() - m) / sd;
  }
  return z;
}

gam::GamSpec fixed_spec(const SlopeUnitTable& t, double precision) {
  gam::GamSpec s;
  s.fixed = t.column_names();
  s.fixed_precision = precision;
  return s;
}

Eigen::MatrixXd fixed_prior(Eigen::Index p, double precision) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(p, p) * precision;
  q(0, 0) = 0.0;
  return q;
}

// ---------------------------------------------------------------------------

Outcome glm_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst_lasso = 0.0;
  double worst_gam = 0.0;
  for (int d = 0; d < 20; ++d) {
    std::vector<double> beta(5);
    for (auto& b : beta) b = coef(eng);
    const double b0 = 0.5 * coef(eng);
    const auto data = oracle::simulate_logistic(2000, b0, beta, 1000 + d);
    const Eigen::VectorXd newton = oracle::newton_logistic(oracle::with_intercept(data.x), data.y);

    const Eigen::VectorXd l = lasso::fit_lasso_logistic(data.x, data.y, 0.0);
    worst_lasso = std::max(worst_lasso, (l - newton).cwiseAbs().maxCoeff());

    // The GAM works on standardized covariates; map its mode back to raw units.
    const auto table = oracle::make_table(data.x, data.y);
    const auto model = gam::fit_gam(fixed_spec(table, 1e-8), table);
    const Eigen::VectorXd a = model.posterior.mode;
    Eigen::VectorXd raw(6);
    raw(0) = a(0);
    const double n = static_cast<double>(data.x.rows());
    for (Eigen::Index j = 0; j < 5; ++j) {
      const double m = data.x.col(j).mean();
      const double sd = std::sqrt((data.x.col(j).array() - m).square().sum() / (n - 1.0));
      raw(j + 1) = a(j + 1) / sd;
      raw(0) -= a(j + 1) * m / sd;
    }
    worst_gam = std::max(worst_gam, (raw - newton).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst_lasso <= 1e-4 && worst_gam <= 1e-4 && secs < 60.0,
          "max |lasso - newton| " + fmt("%.2e", worst_lasso) + ", max |gam - newton| " + fmt("%.2e", worst_gam) +
              ", " + fmt("%.1f", secs) + " s (limit 60 s)"};
}

Outcome lasso_saturation_kkt() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 eng(21);
  std::uniform_int_distribution<int> pick(0, 2);
  std::normal_distribution<double> z(0.0, 1.0);
  std::size_t nonzero_at_max = 0;
  double worst_kkt = 0.0;
  double worst_lmax = 0.0;
  for (int d = 0; d < 50; ++d) {
    const std::size_t m = 6;
    std::vector<double> beta(m);
    for (auto& b : beta) b = pick(eng) == 0 ? 0.0 : z(eng);
    auto data = oracle::simulate_logistic(300, 0.3 * z(eng), beta, 2000 + d);
    // Correlated columns make the path less trivial.
    data.x.col(1) += 0.6 * data.x.col(0);
    const Eigen::Index n = data.x.rows();
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = data.y[static_cast<std::size_t>(i)];
    const double ybar = yv.mean();
    const double lmax_oracle =
        (data.x.transpose() * (yv.array() - ybar).matrix()).cwiseAbs().maxCoeff() / static_cast<double>(n);
    const double lmax = lasso::lambda_max(data.x, data.y);
    worst_lmax = std::max(worst_lmax, std::abs(lmax - lmax_oracle) / lmax_oracle);

    const Eigen::VectorXd at_max = lasso::fit_lasso_logistic(data.x, data.y, lmax);
    for (std::size_t j = 1; j <= m; ++j) nonzero_at_max += at_max(static_cast<Eigen::Index>(j)) != 0.0;

    const auto seq = lasso::lambda_sequence(lmax, 100);
    for (std::size_t k = 0; k < 10; ++k) {
      const double lambda = seq[k * 11];
      const Eigen::VectorXd b = lasso::fit_lasso_logistic(data.x, data.y, lambda);
      Eigen::VectorXd r(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = b(0) + data.x.row(i).dot(b.tail(static_cast<Eigen::Index>(m)));
        r(i) = yv(i) - oracle::sigmoid(eta);
      }
      const Eigen::VectorXd g = data.x.transpose() * r / static_cast<double>(n);
      worst_kkt = std::max(worst_kkt, std::abs(r.mean()));
      for (std::size_t j = 0; j < m; ++j) {
        const double bj = b(static_cast<Eigen::Index>(j + 1));
        const double gj = g(static_cast<Eigen::Index>(j));
        const double viol = bj == 0.0 ? std::max(0.0, std::abs(gj) - lambda) : std::abs(gj - lambda * (bj > 0 ? 1 : -1));
        worst_kkt = std::max(worst_kkt, viol);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {nonzero_at_max == 0 && worst_kkt <= 1e-5 && worst_lmax < 1e-12 && secs < 120.0,
          std::to_string(nonzero_at_max) + " nonzero at lambda_max, worst KKT violation " + fmt("%.2e", worst_kkt) +
              ", " + fmt("%.1f", secs) + " s (limit 120 s)"};
}

Outcome laplace_vs_mcmc() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = oracle::simulate_logistic(50, 0.0, {0.3, -0.3}, 31);
  const Eigen::MatrixXd z = standardize(data.x);
  const auto table = oracle::make_table(z, data.y);
  const auto model = gam::fit_gam(fixed_spec(table, 1e-3), table);
  const auto& post = model.posterior;
  const Eigen::MatrixXd xi = oracle::with_intercept(z);
  const Eigen::MatrixXd q = fixed_prior(3, 1e-3);
  const auto chain = oracle::metropolis([&](const Eigen::VectorXd& b) { return oracle::log_posterior(xi, data.y, q, b); },
                                        post.mode, post.covariance, 2.4 / std::sqrt(3.0), 200000, 5000, 77);
  const double dmean = (chain.mean - post.mode).cwiseAbs().maxCoeff();
  const double dsd = (chain.sd - post.sd()).cwiseAbs().maxCoeff();
  const double secs = seconds_since(t0);
  return {dmean <= 0.05 && dsd <= 0.05 && secs < 120.0,
          "max |mean diff| " + fmt("%.4f", dmean) + ", max |sd diff| " + fmt("%.4f", dsd) + ", acceptance " +
              fmt("%.2f", chain.acceptance) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome derivative_checks() {
  std::mt19937_64 eng(41);
  std::normal_distribution<double> nz(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // A design with fixed effects and an RW1 smooth.
  const std::size_t n = 300;
  Eigen::MatrixXd x(n, 3);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = nz(eng);
    x(i, 1) = nz(eng);
    x(i, 2) = u(eng);
    y[i] = u(eng) < oracle::sigmoid(0.5 * x(i, 0) - x(i, 1) + std::sin(6 * x(i, 2))) ? 1 : 0;
  }
  const auto table = oracle::make_table(x, y, {"a", "b", "s"});
  gam::GamOptions o;
  o.fixed = {"a", "b"};
  o.smooths = {"s"};
  o.bins = 8;
  const auto spec = gam::make_spec(o, table);
  const auto design = apply_scaler(fit_scaler(table, spec.fixed), table);
  const Eigen::MatrixXd xm = gam::build_design(spec, design, table).matrix;
  const std::vector<double> lp = {0.7};
  const Eigen::MatrixXd penalty = gam::penalty_matrix(spec, lp);
  const auto f = [&](const Eigen::VectorXd& th) { return gam::penalized_loglik(xm, y, penalty, th); };

  double worst_g = 0.0;
  double worst_h = 0.0;
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd th(xm.cols());
    for (Eigen::Index j = 0; j < th.size(); ++j) th(j) = 0.5 * nz(eng);
    const Eigen::VectorXd g = gam::penalized_gradient(xm, y, penalty, th);
    const Eigen::VectorXd gfd = oracle::fd_gradient(f, th);
    worst_g = std::max(worst_g, (g - gfd).cwiseAbs().maxCoeff() / std::max(1.0, gfd.cwiseAbs().maxCoeff()));
    const Eigen::MatrixXd h = gam::negative_hessian(xm, penalty, th);
    const Eigen::MatrixXd hfd = -oracle::fd_hessian(f, th);
    worst_h = std::max(worst_h, (h - hfd).norm() / hfd.norm());
  }

  // Laplace covariance on a 5-parameter model against the inverse of the
  // finite-difference Hessian of the log posterior at the mode.
  const auto data = oracle::simulate_logistic(400, 0.2, {0.8, -0.5, 0.3, 0.0}, 43);
  const Eigen::MatrixXd z = standardize(data.x);
  const auto t5 = oracle::make_table(z, data.y);
  const auto model = gam::fit_gam(fixed_spec(t5, 1e-3), t5);
  const Eigen::MatrixXd xi = oracle::with_intercept(z);
  const Eigen::MatrixXd q = fixed_prior(5, 1e-3);
  const Eigen::MatrixXd hfd = oracle::fd_hessian(
      [&](const Eigen::VectorXd& b) { return oracle::log_posterior(xi, data.y, q, b); }, model.posterior.mode);
  const Eigen::MatrixXd cov_fd = (-hfd).inverse();
  const double cov_err = (model.posterior.covariance - cov_fd).norm() / cov_fd.norm();
  return {worst_g <= 1e-4 && worst_h <= 1e-4 && cov_err <= 1e-3,
          "gradient rel err " + fmt("%.2e", worst_g) + ", Hessian rel err " + fmt("%.2e", worst_h) +
              ", covariance rel Frobenius " + fmt("%.2e", cov_err)};
}

Outcome synthetic_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> beta = {0.8, -0.5, 0.3, 0.6};
  const double b0 = -1.0;
  const std::size_t k_classes = 20;
  std::vector<double> truth(k_classes);
  for (std::size_t k = 0; k < k_classes; ++k) truth[k] = std::sin(2.0 * M_PI * (k + 0.5) / k_classes);
  std::vector<int> covered(4, 0);
  double min_r = 1.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::mt19937_64 eng(5000 + rep);
    std::normal_distribution<double> nz(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 20000;
    Eigen::MatrixXd x(n, 5);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = b0;
      for (int j = 0; j < 4; ++j) {
        x(i, j) = nz(eng);
        eta += beta[j] * x(i, j);
      }
      x(i, 4) = u(eng);
      eta += truth[std::min(k_classes - 1, static_cast<std::size_t>(x(i, 4) * k_classes))];
      y[i] = u(eng) < oracle::sigmoid(eta) ? 1 : 0;
    }
    const auto table = oracle::make_table(x, y, {"x1", "x2", "x3", "x4", "s"});
    gam::GamOptions o;
    o.fixed = {"x1", "x2", "x3", "x4"};
    o.smooths = {"s"};
    o.bins = k_classes;
    const auto model = gam::fit_gam(gam::make_spec(o, table), table);
    const Eigen::VectorXd sd = model.posterior.sd();
    for (int j = 0; j < 4; ++j) {
      const double scale = model.scaler.sds[static_cast<std::size_t>(j)];
      const double lo = (model.posterior.mode(j + 1) - gam::kZ975 * sd(j + 1)) / scale;
      const double hi = (model.posterior.mode(j + 1) + gam::kZ975 * sd(j + 1)) / scale;
      covered[static_cast<std::size_t>(j)] += lo <= beta[static_cast<std::size_t>(j)] && beta[static_cast<std::size_t>(j)] <= hi;
    }
    std::vector<double> fitted(k_classes);
    for (std::size_t k = 0; k < k_classes; ++k) fitted[k] = model.posterior.mode(static_cast<Eigen::Index>(5 + k));
    min_r = std::min(min_r, oracle::pearson(fitted, truth));
  }
  const double secs = seconds_since(t0);
  const int min_cov = *std::min_element(covered.begin(), covered.end());
  std::string cov;
  for (int c : covered) cov += std::to_string(c) + " ";
  return {min_cov >= 90 && min_r > 0.9 && secs < 900.0,
          "coverage per effect " + cov + "/100, min smooth r " + fmt("%.3f", min_r) + ", " + fmt("%.1f", secs) +
              " s (limit 900 s)"};
}

Outcome cv_null_band() {
  auto run = [](const std::vector<double>& beta, std::uint64_t seed, bool* partition_ok) {
    const auto d = oracle::simulate_logistic(1000, 0.0, beta, seed);
    const auto t = oracle::make_table(d.x, d.y);
    gam::GamOptions o;
    o.fixed = t.column_names();
    const auto plan = validation::make_folds(t.n_units(), 10, seed + 1, t.labels());
    const auto r = validation::cross_validate(o, t, plan);
    std::vector<int> seen(t.n_units(), 0);
    for (std::size_t f = 0; f < plan.k; ++f) {
      for (auto i : plan.test_rows(f)) ++seen[i];
    }
    bool ok = r.out_of_fold.size() == t.n_units();
    for (std::size_t i = 0; i < seen.size(); ++i) ok = ok && seen[i] == 1 && std::isfinite(r.out_of_fold[i]);
    *partition_ok = ok;
    return r.median_auc;
  };
  bool p1 = false;
  bool p2 = false;
  const double noise = run({0.0, 0.0, 0.0, 0.0}, 61, &p1);
  const double signal = run({1.5, -1.5, 2.0, -1.5}, 62, &p2);
  return {noise >= 0.4 && noise <= 0.6 && signal > 0.75 && p1 && p2,
          "noise median AUC " + fmt("%.3f", noise) + ", signal median AUC " + fmt("%.3f", signal) +
              ", out-of-fold partition " + (p1 && p2 ? "ok" : "broken")};
}

Outcome simulation_calibration() {
  std::mt19937_64 eng(71);
  std::normal_distribution<double> nz(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::lognormal_distribution<double> pga_dist(-1.5, 0.6);
  const std::size_t n = 1500;
  Eigen::MatrixXd x(n, 4);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = nz(eng);
    x(i, 1) = pga_dist(eng);
    x(i, 2) = u(eng);
    x(i, 3) = nz(eng);
    const double eta = -1.0 + 0.7 * x(i, 0) + 4.0 * x(i, 1) + std::sin(2 * M_PI * x(i, 2)) - 0.3 * x(i, 3);
    y[i] = u(eng) < oracle::sigmoid(eta) ? 1 : 0;
  }
  const auto table = oracle::make_table(x, y, {"a", "pga", "s", "b"});
  gam::GamOptions o;
  o.fixed = {"a", "pga", "b"};
  o.smooths = {"s"};
  o.bins = 10;
  const auto model = gam::fit_gam(gam::make_spec(o, table), table);

  std::vector<std::size_t> rows(100);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i * 15;
  const auto units = table.subset(rows);
  const scenario::PredictionContext ctx(model, units, "pga");
  scenario::ScenarioSet set;
  set.unit_ids = units.unit_ids();
  for (int s = 0; s < 100; ++s) {
    char id[16];
    std::snprintf(id, sizeof id, "S%03d", s);
    set.ids.push_back(id);
    std::vector<double> v(units.n_units());
    for (auto& p : v) p = pga_dist(eng);
    set.pga.push_back(v);
  }
  const auto summary = scenario::run_all_scenarios(ctx, set, 1000, 19);

  // Generating coefficients: independent draws from the fitted Gaussian,
  // one per scenario, via an eigendecomposition of its covariance.
  const auto& post = model.posterior;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(post.covariance);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const std::size_t pj = model.scaler.index_of("pga");
  std::size_t hits = 0;
  std::size_t cases = 0;
  for (std::size_t s = 0; s < set.size(); ++s) {
    Eigen::VectorXd zs(post.mode.size());
    for (Eigen::Index j = 0; j < zs.size(); ++j) zs(j) = nz(eng);
    const Eigen::VectorXd theta = post.mode + root * zs;
    Eigen::MatrixXd m = ctx.base_matrix();
    for (std::size_t i = 0; i < units.n_units(); ++i) {
      m(static_cast<Eigen::Index>(i), ctx.trigger_column()) =
          (set.pga[s][i] - model.scaler.means[pj]) / model.scaler.sds[pj];
    }
    const Eigen::VectorXd eta = m * theta;
    const auto& r = summary.scenarios[s];
    for (std::size_t i = 0; i < units.n_units(); ++i) {
      const double p = oracle::sigmoid(eta(static_cast<Eigen::Index>(i)));
      hits += r.q025[i] <= p && p <= r.q975[i];
      ++cases;
    }
  }
  const double coverage = static_cast<double>(hits) / static_cast<double>(cases);
  return {cases == 10000 && std::abs(coverage - 0.95) <= 0.02,
          "coverage " + fmt("%.4f", coverage) + " over " + std::to_string(cases) + " unit x scenario cases"};
}

bool same_results(const scenario::ScenarioResult& a, const scenario::ScenarioResult& b) {
  return a.id == b.id && a.mean == b.mean && a.q025 == b.q025 && a.median == b.median && a.q975 == b.q975 &&
         a.width == b.width;
}

Outcome full_scale_throughput() {
  synth::SynthOptions so;
  so.n_units = 4000;
  so.n_scenarios = 217;
  so.seed = 81;
  const auto data = synth::generate(so);
  gam::GamOptions o;
  o.fixed.assign(synth::kLinearCovariates.begin(), synth::kLinearCovariates.end());
  o.smooths.assign(synth::kSmoothCovariates.begin(), synth::kSmoothCovariates.end());
  const auto model = gam::fit_gam(gam::make_spec(o, data.table), data.table);
  const scenario::PredictionContext ctx(model, data.table, "pga");

  const auto t0 = std::chrono::steady_clock::now();
  const auto summary = scenario::run_all_scenarios(ctx, data.scenarios, 1000, 5, 4);
  const scenario::ModelDrawSource source(ctx, data.scenarios, summary);
  const auto agg = scenario::aggregate(summary, &source, 4);
  const double secs = seconds_since(t0);

  // Same run with one thread and the scenarios in reverse order.
  scenario::ScenarioSet reversed = data.scenarios;
  std::reverse(reversed.ids.begin(), reversed.ids.end());
  std::reverse(reversed.pga.begin(), reversed.pga.end());
  const auto summary_r = scenario::run_all_scenarios(ctx, reversed, 1000, 5, 1);
  const scenario::ModelDrawSource source_r(ctx, reversed, summary_r);
  const auto agg_r = scenario::aggregate(summary_r, &source_r, 1);

  bool invariant = summary.failures.empty() && summary_r.failures.empty() &&
                   summary.scenarios.size() == 217 && summary_r.scenarios.size() == 217;
  std::map<std::string, const scenario::ScenarioResult*> by_id;
  for (const auto& r : summary_r.scenarios) by_id[r.id] = &r;
  for (const auto& r : summary.scenarios) invariant = invariant && by_id.count(r.id) && same_results(r, *by_id[r.id]);
  invariant = invariant && agg.global_mean == agg_r.global_mean && agg.global_q025 == agg_r.global_q025 &&
              agg.global_q975 == agg_r.global_q975 && agg.worst_case == agg_r.worst_case;
  return {secs < 600.0 && invariant,
          "217 scenarios x 1000 draws x 4000 units in " + fmt("%.1f", secs) + " s (limit 600 s), " +
              (invariant ? "invariant" : "NOT invariant") + " to thread count and scenario order"};
}

std::vector<double> read_column(const fs::path& file, const std::string& name) {
  const auto doc = csv::read(file);
  const auto c = doc.find(name);
  if (c == std::string::npos) throw IoError("missing column " + name + " in " + file.string());
  std::vector<double> out;
  for (const auto& row : doc.rows) out.push_back(csv::parse_double(row[c]));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome identity_plug_in() {
  const fs::path dir = fs::temp_directory_path() / "hazardsim_acceptance_identity";
  fs::remove_all(dir);
  synth::SynthOptions so;
  so.n_units = 3000;
  so.n_scenarios = 2;
  so.seed = 91;
  const auto data = synth::generate(so);
  synth::write(data, dir);
  PipelineConfig cfg = load_config(dir / "config.txt");
  cfg.out_dir = dir / "out";
  cfg.threads = 1;
  pipeline::run_pipeline(cfg, pipeline::Stage::kSelect, pipeline::Stage::kFit);

  // A scenario whose trigger equals the training trigger, with the benchmark id.
  fs::create_directories(dir / "identity");
  {
    csv::Writer w(dir / "identity" / "benchmark.csv");
    w.row({"unit_id", "pga"});
    const auto pga = data.table.column("pga");
    for (std::size_t i = 0; i < data.table.n_units(); ++i) {
      w.field(data.table.unit_ids()[i]).field(pga[i]);
      w.end_row();
    }
  }
  pipeline::SimulateRequest req;
  req.model = cfg.out_dir / "model.bin";
  req.scenarios = dir / "identity";
  req.out_dir = dir / "identity_out";
  req.draws = cfg.draws;
  req.seed = cfg.seed;
  pipeline::run_simulate(req);
  const bool identical =
      slurp(cfg.out_dir / "benchmark_summary.csv") == slurp(req.out_dir / "scenario_benchmark_summary.csv");

  const auto mean = read_column(cfg.out_dir / "benchmark_summary.csv", "mean");
  const auto width = read_column(cfg.out_dir / "benchmark_summary.csv", "width");
  const auto plot = validation::error_plot_table(mean, width);
  std::size_t argmax = 0;
  double best = -1.0;
  for (std::size_t b = 0; b < plot.bins.size(); ++b) {
    if (plot.bins[b].count >= 5 && plot.bins[b].median_width > best) {
      best = plot.bins[b].median_width;
      argmax = b;
    }
  }
  // Central bins: mean susceptibility in [0.25, 0.75].
  const bool bell = argmax >= 5 && argmax <= 14;
  return {identical && bell, std::string("benchmark summaries ") + (identical ? "identical" : "DIFFERENT") +
                                 ", widest median CI in bin " + std::to_string(argmax + 1) + " of 20 (" +
                                 fmt("%.3f", best) + ")"};
}

Outcome worst_case_dominance() {
  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n_units = 1 + eng() % 40;
    const std::size_t n_scen = 1 + eng() % 25;
    scenario::ScenarioSimulationSummary s;
    for (std::size_t i = 0; i < n_units; ++i) s.unit_ids.push_back("u" + std::to_string(i));
    s.n_draws = 2 + eng() % 1000;
    for (std::size_t k = 0; k < n_scen; ++k) {
      scenario::ScenarioResult r;
      r.id = "s" + std::to_string(eng() % 1000000) + "_" + std::to_string(k);
      r.n_draws = s.n_draws;
      for (std::size_t i = 0; i < n_units; ++i) {
        // Mix of extreme and ordinary magnitudes.
        const double m = trial % 4 == 0 ? std::pow(u(eng), 40.0) : u(eng);
        const double lo = m * u(eng);
        const double hi = m + (1.0 - m) * u(eng);
        r.mean.push_back(m);
        r.median.push_back(m);
        r.q025.push_back(lo);
        r.q975.push_back(hi);
        r.width.push_back(hi - lo);
        r.draw_min.push_back(lo);
        r.draw_max.push_back(hi);
      }
      s.scenarios.push_back(std::move(r));
    }
    const auto agg = scenario::aggregate(s);
    for (std::size_t i = 0; i < n_units; ++i) {
      ++checked;
      violations += !(agg.worst_case[i] >= agg.global_mean[i]);
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(checked) +
                               " units in 1000 randomized inputs"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"glm equivalence", glm_equivalence},
      {"lasso saturation and KKT", lasso_saturation_kkt},
      {"laplace vs metropolis", laplace_vs_mcmc},
      {"gradient, Hessian and covariance checks", derivative_checks},
      {"synthetic recovery", synthetic_recovery},
      {"cv null band and signal", cv_null_band},
      {"simulation calibration", simulation_calibration},
      {"full-scale throughput and invariance", full_scale_throughput},
      {"identity plug-in and bell shape", identity_plug_in},
      {"worst-case dominance", worst_case_dominance},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int number = static_cast<int>(c) + 1;
    if (!only.empty() && !only.count(number)) continue;
    Outcome out;
    try {
      out = criteria[c].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("[%2d] %-42s %s  %s\n", number, criteria[c].first.c_str(), out.pass ? "PASS" : "FAIL",
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
