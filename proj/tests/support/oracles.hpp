#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: plain Newton-Raphson, a random-walk Metropolis sampler and
// central finite differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hazardsim/core_data.hpp"

namespace oracle {

inline double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

/// Maximizes sum_i [y_i eta_i - log(1 + e^eta_i)] - 0.5 beta' diag(prec) beta
/// with full Newton steps. `x` must include any intercept column.
inline Eigen::VectorXd newton_logistic(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                       const Eigen::VectorXd& prec = {}, int max_iter = 100) {
  const Eigen::Index p = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const Eigen::VectorXd pr = prec.size() == 0 ? Eigen::VectorXd::Zero(p) : prec;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd r(x.rows());
    Eigen::VectorXd w(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double m = sigmoid(eta(i));
      r(i) = y[static_cast<std::size_t>(i)] - m;
      w(i) = m * (1.0 - m);
    }
    const Eigen::VectorXd g = x.transpose() * r - pr.cwiseProduct(beta);
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal() += pr;
    const Eigen::VectorXd step = h.ldlt().solve(g);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return beta;
}

/// Logistic log-likelihood plus Gaussian log prior with precision matrix q.
inline double log_posterior(const Eigen::MatrixXd& x, const std::vector<int>& y, const Eigen::MatrixXd& q,
                            const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double e = eta(i);
    const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[static_cast<std::size_t>(i)] * e - log1pexp;
  }
  return ll - 0.5 * beta.dot(q * beta);
}

struct ChainSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  double acceptance = 0.0;
};

/// Random-walk Metropolis with proposal N(0, scale^2 * proposal_cov).
inline ChainSummary metropolis(const std::function<double(const Eigen::VectorXd&)>& logp, Eigen::VectorXd start,
                               const Eigen::MatrixXd& proposal_cov, double scale, std::size_t steps,
                               std::size_t burn_in, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::MatrixXd l = proposal_cov.llt().matrixL();
  const Eigen::Index p = start.size();
  Eigen::VectorXd cur = start;
  double cur_lp = logp(cur);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(p);
  std::size_t accepted = 0;
  std::size_t kept = 0;
  Eigen::VectorXd e(p);
  for (std::size_t s = 0; s < steps + burn_in; ++s) {
    for (Eigen::Index j = 0; j < p; ++j) e(j) = z(eng);
    const Eigen::VectorXd prop = cur + scale * (l * e);
    const double lp = logp(prop);
    if (std::log(u(eng)) < lp - cur_lp) {
      cur = prop;
      cur_lp = lp;
      if (s >= burn_in) ++accepted;
    }
    if (s >= burn_in) {
      sum += cur;
      sum2 += cur.cwiseProduct(cur);
      ++kept;
    }
  }
  ChainSummary out;
  out.mean = sum / static_cast<double>(kept);
  out.sd = (sum2 / static_cast<double>(kept) - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0).cwiseSqrt();
  out.acceptance = static_cast<double>(accepted) / static_cast<double>(steps);
  return out;
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a(j) += h;
    b(j) -= h;
    g(j) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Hessian by central differences of the function values.
inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                  double h = 1e-4) {
  const Eigen::Index p = x.size();
  Eigen::MatrixXd hess(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      auto at = [&](double di, double dj) {
        Eigen::VectorXd y = x;
        y(i) += di;
        y(j) += dj;
        return f(y);
      };
      const double v = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
      hess(i, j) = hess(j, i) = v;
    }
  }
  return hess;
}

struct LogisticData {
  Eigen::MatrixXd x;  // n x m, no intercept column
  std::vector<int> y;
};

/// x ~ N(0, 1) iid; y ~ Bernoulli(sigmoid(beta0 + x beta)). Resamples
/// until both classes are present.
inline LogisticData simulate_logistic(std::size_t n, double beta0, const std::vector<double>& beta, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LogisticData d;
  const auto m = static_cast<Eigen::Index>(beta.size());
  d.x.resize(static_cast<Eigen::Index>(n), m);
  d.y.resize(n);
  for (;;) {
    int pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double eta = beta0;
      for (Eigen::Index j = 0; j < m; ++j) {
        d.x(static_cast<Eigen::Index>(i), j) = z(eng);
        eta += beta[static_cast<std::size_t>(j)] * d.x(static_cast<Eigen::Index>(i), j);
      }
      d.y[i] = u(eng) < sigmoid(eta) ? 1 : 0;
      pos += d.y[i];
    }
    if (pos > 0 && pos < static_cast<int>(n)) return d;
  }
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

/// Table with ids "u1".."un" and columns "x1".."xm".
inline hazardsim::SlopeUnitTable make_table(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                            std::vector<std::string> names = {}) {
  std::vector<std::string> ids(y.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "u" + std::to_string(i + 1);
  if (names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  std::vector<std::vector<double>> cols;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    cols.emplace_back(x.col(j).data(), x.col(j).data() + x.rows());
  }
  return hazardsim::SlopeUnitTable::create(ids, y, names, cols);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
