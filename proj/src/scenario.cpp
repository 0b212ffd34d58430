#include "hazardsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"
#include "hazardsim/parallel.hpp"
#include "hazardsim/rng.hpp"

namespace hazardsim::scenario {

namespace {

std::unordered_map<std::string, std::size_t> index_units(std::span<const std::string> unit_ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) index.emplace(unit_ids[i], i);
  return index;
}

/// Fills `values` for one scenario from (unit_id, pga) pairs.
std::vector<double> align(const std::string& scenario_id,
                          const std::vector<std::pair<std::string, double>>& pairs,
                          const std::unordered_map<std::string, std::size_t>& index, std::size_t n_units) {
  std::vector<double> values(n_units, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(n_units, false);
  for (const auto& [unit, pga] : pairs) {
    auto it = index.find(unit);
    if (it == index.end()) {
      throw ValidationError("scenario '" + scenario_id + "': unknown unit_id '" + unit + "'");
    }
    if (seen[it->second]) {
      throw ValidationError("scenario '" + scenario_id + "': unit_id '" + unit + "' appears twice");
    }
    seen[it->second] = true;
    values[it->second] = pga;
  }
  for (std::size_t i = 0; i < n_units; ++i) {
    if (!seen[i]) throw ValidationError("scenario '" + scenario_id + "' does not cover every unit");
  }
  return values;
}

double kahan_mean_shifted(std::span<const double> v) {
  // Shifted by the first value so identical draws give that value exactly.
  const double shift = v[0];
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double d = x - shift;
    const double t = sum + d;
    comp += std::abs(sum) >= std::abs(d) ? (sum - t) + d : (d - t) + sum;
    sum = t;
  }
  return shift + (sum + comp) / static_cast<double>(v.size());
}

}  // namespace

ScenarioSet load_scenarios(const std::filesystem::path& source, std::span<const std::string> unit_ids) {
  ScenarioSet set;
  set.unit_ids.assign(unit_ids.begin(), unit_ids.end());
  const auto index = index_units(unit_ids);
  std::map<std::string, std::vector<std::pair<std::string, double>>> grouped;
  std::vector<std::string> order;

  auto add_rows = [&](const csv::Document& doc, const std::string& fixed_id, const std::string& label) {
    const std::size_t sid = doc.find("scenario_id");
    const std::size_t uid = doc.find("unit_id");
    const std::size_t pga = doc.find("pga");
    if (uid == std::string::npos || pga == std::string::npos || (fixed_id.empty() && sid == std::string::npos)) {
      throw ValidationError(label + ": scenario CSV needs columns unit_id,pga (and scenario_id in long format)");
    }
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
      const std::string id = (sid != std::string::npos) ? doc.rows[r][sid] : fixed_id;
      double value = 0.0;
      try {
        value = csv::parse_double(doc.rows[r][pga]);
      } catch (const ValidationError& e) {
        throw ValidationError(label + " row " + std::to_string(r + 1) + ": " + e.what());
      }
      auto [it, inserted] = grouped.try_emplace(id);
      if (inserted) order.push_back(id);
      it->second.emplace_back(doc.rows[r][uid], value);
    }
  };

  if (std::filesystem::is_directory(source)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(source)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no scenario CSV files in " + source.string());
    for (const auto& f : files) {
      const std::string id = f.stem().string();
      if (grouped.count(id)) throw ValidationError("duplicate scenario id '" + id + "'");
      add_rows(csv::read(f), id, f.filename().string());
    }
  } else if (std::filesystem::is_regular_file(source)) {
    const auto doc = csv::read(source);
    const std::string fallback = doc.find("scenario_id") == std::string::npos ? source.stem().string() : "";
    add_rows(doc, fallback, source.filename().string());
  } else {
    throw IoError("scenario source not found: " + source.string());
  }

  for (const auto& id : order) {
    set.ids.push_back(id);
    set.pga.push_back(align(id, grouped.at(id), index, unit_ids.size()));
  }
  if (set.ids.empty()) throw ValidationError("no scenarios found in " + source.string());
  return set;
}

PredictionContext::PredictionContext(gam::GamModel model, SlopeUnitTable units, std::string trigger)
    : model_(std::move(model)), units_(std::move(units)), trigger_(std::move(trigger)) {
  const auto& fixed = model_.spec.fixed;
  auto it = std::find(fixed.begin(), fixed.end(), trigger_);
  if (it == fixed.end()) {
    throw ValidationError("model has no fixed-effect column '" + trigger_ + "' to plug scenarios into");
  }
  trigger_column_ = 1 + static_cast<Eigen::Index>(it - fixed.begin());
  scaler_index_ = model_.scaler.index_of(trigger_);
  base_ = gam::model_design(model_, units_);
}

PluggedDesign plug_in(const PredictionContext& context, std::span<const double> pga) {
  const std::size_t n = context.units().n_units();
  if (pga.size() != n) {
    throw ValidationError("unit mismatch: scenario has " + std::to_string(pga.size()) + " values for " +
                          std::to_string(n) + " units");
  }
  PluggedDesign out;
  out.matrix = context.base_matrix();
  out.extrapolated.assign(n, false);
  const Scaler& scaler = context.model().scaler;
  const std::size_t j = context.trigger_scaler_index();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pga[i] >= 0.0) || !std::isfinite(pga[i])) {
      throw ValidationError("negative or non-finite PGA for unit '" + context.units().unit_ids()[i] + "'");
    }
    const double z = scaler.transform(j, pga[i]);
    out.matrix(static_cast<Eigen::Index>(i), context.trigger_column()) = z;
    if (std::abs(z) > kExtrapolationZ) {
      out.extrapolated[i] = true;
      ++out.n_extrapolated;
    }
  }
  return out;
}

std::uint64_t scenario_seed(std::uint64_t seed, std::string_view scenario_id) {
  return rng::derive(seed, scenario_id);
}

Eigen::MatrixXd susceptibility_draws(const gam::GamPosterior& posterior, const Eigen::MatrixXd& matrix,
                                     std::size_t n_draws, std::uint64_t stream_seed) {
  if (n_draws < 1) throw ValidationError("n_draws must be at least 1");
  if (static_cast<std::size_t>(matrix.cols()) != posterior.dim()) {
    throw ValidationError("dimension mismatch: model matrix has " + std::to_string(matrix.cols()) +
                          " columns, posterior has " + std::to_string(posterior.dim()) + " coefficients");
  }
  // eta_d = X mode + (X A) z_d; with A = 0 this is X mode bit for bit.
  const Eigen::VectorXd base = matrix * posterior.mode;
  const Eigen::MatrixXd xa = matrix * posterior.draw_transform();
  const Eigen::MatrixXd z = gam::standard_normals(n_draws, static_cast<std::size_t>(xa.cols()), stream_seed);
  Eigen::MatrixXd eta = z * xa.transpose();
  eta.rowwise() += base.transpose();
  return eta.unaryExpr([](double e) { return gam::inverse_logit(e); });
}

double percentile(std::span<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("percentile level outside [0,1]");
  const std::size_t n = values.size();
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double x_lo = values[lo];
  if (frac == 0.0 || lo + 1 >= n) return x_lo;
  const double x_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return x_lo + frac * (x_hi - x_lo);
}

ScenarioResult simulate_scenario(const gam::GamPosterior& posterior, const Eigen::MatrixXd& matrix,
                                 std::size_t n_draws, std::uint64_t stream_seed, std::string id) {
  if (n_draws < 2) throw ValidationError("need at least 2 draws per scenario");
  const Eigen::MatrixXd draws = susceptibility_draws(posterior, matrix, n_draws, stream_seed);
  const auto n = static_cast<std::size_t>(draws.cols());
  ScenarioResult r;
  r.id = std::move(id);
  r.n_draws = n_draws;
  r.mean.resize(n);
  r.q025.resize(n);
  r.median.resize(n);
  r.q975.resize(n);
  r.width.resize(n);
  r.draw_min.resize(n);
  r.draw_max.resize(n);
  std::vector<double> scratch(n_draws);
  for (std::size_t u = 0; u < n; ++u) {
    const double* col = draws.col(static_cast<Eigen::Index>(u)).data();
    std::copy(col, col + n_draws, scratch.begin());
    r.mean[u] = kahan_mean_shifted(scratch);
    const auto [mn, mx] = std::minmax_element(scratch.begin(), scratch.end());
    r.draw_min[u] = *mn;
    r.draw_max[u] = *mx;
    r.q025[u] = percentile(scratch, 0.025);
    r.median[u] = percentile(scratch, 0.5);
    r.q975[u] = percentile(scratch, 0.975);
    r.width[u] = r.q975[u] - r.q025[u];
  }
  return r;
}

ScenarioSimulationSummary run_all_scenarios(const PredictionContext& context, const ScenarioSet& scenarios,
                                            std::size_t n_draws, std::uint64_t seed, std::size_t threads) {
  if (scenarios.unit_ids != context.units().unit_ids()) {
    throw ValidationError("scenario set is not aligned with the model's units");
  }
  {
    std::set<std::string> ids(scenarios.ids.begin(), scenarios.ids.end());
    if (ids.size() != scenarios.ids.size()) throw ValidationError("duplicate scenario ids");
  }
  ScenarioSimulationSummary summary;
  summary.unit_ids = context.units().unit_ids();
  summary.n_draws = n_draws;
  summary.seed = seed;
  std::vector<ScenarioResult> results(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  parallel_for(scenarios.size(), threads, [&](std::size_t s, std::size_t) {
    try {
      const PluggedDesign design = plug_in(context, scenarios.pga[s]);
      results[s] = simulate_scenario(context.model().posterior, design.matrix, n_draws,
                                     scenario_seed(seed, scenarios.ids[s]), scenarios.ids[s]);
      results[s].n_extrapolated = design.n_extrapolated;
    } catch (const Error& e) {
      errors[s] = e.what();
    }
  });
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    if (errors[s].empty()) {
      summary.scenarios.push_back(std::move(results[s]));
    } else {
      summary.failures.emplace_back(scenarios.ids[s], errors[s]);
    }
  }
  return summary;
}

ModelDrawSource::ModelDrawSource(const PredictionContext& context, const ScenarioSet& scenarios,
                                 const ScenarioSimulationSummary& summary)
    : context_(context), scenarios_(scenarios), summary_(summary) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t s = 0; s < scenarios.size(); ++s) by_id.emplace(scenarios.ids[s], s);
  for (const auto& r : summary.scenarios) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw ValidationError("summary scenario '" + r.id + "' is not in the scenario set");
    order_.push_back(it->second);
  }
}

Eigen::MatrixXd ModelDrawSource::draws(std::size_t index) const {
  const std::size_t s = order_.at(index);
  const PluggedDesign design = plug_in(context_, scenarios_.pga[s]);
  return susceptibility_draws(context_.model().posterior, design.matrix, summary_.n_draws,
                              scenario_seed(summary_.seed, scenarios_.ids[s]));
}

namespace {

// Exact order statistics over all scenario draws of every unit, without
// holding them in memory. Each target tracks a value interval [lo, hi] known to
// contain the wanted ranks, and `below`, the number of values under lo.
// Histogram passes shrink the interval until it holds few enough values to
// collect and sort.
struct RankTarget {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t below = 0;
  std::size_t in_range = 0;
  std::size_t rank_a = 0;  // zero-based ranks over all draws
  std::size_t rank_b = 0;
  double frac = 0.0;
  bool done = false;
  double value_a = 0.0;
  double value_b = 0.0;
};

constexpr std::size_t kHistogramBins = 256;
constexpr std::size_t kCollectCap = 4096;

struct PassScratch {
  std::vector<std::uint32_t> counts;
  std::vector<double> mins;
  std::vector<double> maxs;
  std::vector<std::vector<double>> collected;
};

std::size_t bin_of(double v, double lo, double hi) {
  const double scaled = (v - lo) / (hi - lo) * static_cast<double>(kHistogramBins);
  if (!(scaled > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled), kHistogramBins - 1);
}

void exact_percentiles(const DrawSource& source, std::size_t n_units, std::size_t total,
                       const std::vector<double>& unit_min, const std::vector<double>& unit_max,
                       std::span<const double> levels, std::vector<std::vector<double>>& out, std::size_t threads) {
  const std::size_t n_levels = levels.size();
  std::vector<RankTarget> targets(n_units * n_levels);
  for (std::size_t u = 0; u < n_units; ++u) {
    for (std::size_t l = 0; l < n_levels; ++l) {
      RankTarget& t = targets[u * n_levels + l];
      const double h = levels[l] * static_cast<double>(total - 1);
      t.rank_a = static_cast<std::size_t>(std::floor(h));
      t.rank_b = std::min(t.rank_a + 1, total - 1);
      t.frac = h - static_cast<double>(t.rank_a);
      t.lo = unit_min[u];
      t.hi = unit_max[u];
      t.in_range = total;
      if (t.lo == t.hi) {
        t.done = true;
        t.value_a = t.value_b = t.lo;
      }
    }
  }

  for (int pass = 0; pass < 64; ++pass) {
    std::vector<std::size_t> hist;     // targets refined by histogram this pass
    std::vector<std::size_t> collect;  // targets resolved by collection this pass
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i].done) continue;
      (targets[i].in_range <= kCollectCap || pass == 63 ? collect : hist).push_back(i);
    }
    if (hist.empty() && collect.empty()) break;

    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, source.n_scenarios()));
    std::vector<PassScratch> scratch(workers);
    for (auto& s : scratch) {
      s.counts.assign(hist.size() * kHistogramBins, 0);
      s.mins.assign(hist.size() * kHistogramBins, std::numeric_limits<double>::infinity());
      s.maxs.assign(hist.size() * kHistogramBins, -std::numeric_limits<double>::infinity());
      s.collected.assign(collect.size(), {});
    }
    parallel_for(source.n_scenarios(), workers, [&](std::size_t sc, std::size_t w) {
      const Eigen::MatrixXd draws = source.draws(sc);
      PassScratch& s = scratch[w];
      for (std::size_t h = 0; h < hist.size(); ++h) {
        const RankTarget& t = targets[hist[h]];
        const auto col = draws.col(static_cast<Eigen::Index>(hist[h] / n_levels));
        for (Eigen::Index d = 0; d < col.size(); ++d) {
          const double v = col[d];
          if (v < t.lo || v > t.hi) continue;
          const std::size_t b = h * kHistogramBins + bin_of(v, t.lo, t.hi);
          ++s.counts[b];
          s.mins[b] = std::min(s.mins[b], v);
          s.maxs[b] = std::max(s.maxs[b], v);
        }
      }
      for (std::size_t c = 0; c < collect.size(); ++c) {
        const RankTarget& t = targets[collect[c]];
        const auto col = draws.col(static_cast<Eigen::Index>(collect[c] / n_levels));
        for (Eigen::Index d = 0; d < col.size(); ++d) {
          const double v = col[d];
          if (v >= t.lo && v <= t.hi) s.collected[c].push_back(v);
        }
      }
    });

    for (std::size_t h = 0; h < hist.size(); ++h) {
      RankTarget& t = targets[hist[h]];
      std::vector<std::size_t> counts(kHistogramBins, 0);
      std::vector<double> mins(kHistogramBins, std::numeric_limits<double>::infinity());
      std::vector<double> maxs(kHistogramBins, -std::numeric_limits<double>::infinity());
      for (const auto& s : scratch) {
        for (std::size_t b = 0; b < kHistogramBins; ++b) {
          counts[b] += s.counts[h * kHistogramBins + b];
          mins[b] = std::min(mins[b], s.mins[h * kHistogramBins + b]);
          maxs[b] = std::max(maxs[b], s.maxs[h * kHistogramBins + b]);
        }
      }
      const std::size_t want_a = t.rank_a - t.below;
      const std::size_t want_b = t.rank_b - t.below;
      std::size_t cum = 0;
      std::size_t bin_a = kHistogramBins;
      std::size_t bin_b = kHistogramBins;
      std::size_t below_a = 0;
      for (std::size_t b = 0; b < kHistogramBins; ++b) {
        if (bin_a == kHistogramBins && want_a < cum + counts[b]) {
          bin_a = b;
          below_a = cum;
        }
        if (bin_b == kHistogramBins && want_b < cum + counts[b]) bin_b = b;
        cum += counts[b];
      }
      if (bin_a == kHistogramBins || bin_b == kHistogramBins) {
        throw Error("internal error: percentile rank fell outside the tracked range", ExitCode::kValidation);
      }
      std::size_t in_range = 0;
      for (std::size_t b = bin_a; b <= bin_b; ++b) in_range += counts[b];
      t.below += below_a;
      t.lo = mins[bin_a];
      t.hi = maxs[bin_b];
      t.in_range = in_range;
      if (t.lo == t.hi) {
        t.done = true;
        t.value_a = t.value_b = t.lo;
      }
    }

    for (std::size_t c = 0; c < collect.size(); ++c) {
      RankTarget& t = targets[collect[c]];
      std::vector<double> values;
      for (auto& s : scratch) values.insert(values.end(), s.collected[c].begin(), s.collected[c].end());
      std::sort(values.begin(), values.end());
      t.value_a = values.at(t.rank_a - t.below);
      t.value_b = values.at(t.rank_b - t.below);
      t.done = true;
    }
  }

  out.assign(n_levels, std::vector<double>(n_units));
  for (std::size_t u = 0; u < n_units; ++u) {
    for (std::size_t l = 0; l < n_levels; ++l) {
      const RankTarget& t = targets[u * n_levels + l];
      out[l][u] = t.frac == 0.0 ? t.value_a : t.value_a + t.frac * (t.value_b - t.value_a);
    }
  }
}

}  // namespace

AggregateSummary aggregate(const ScenarioSimulationSummary& summary, const DrawSource* source, std::size_t threads) {
  const std::size_t n_scen = summary.scenarios.size();
  if (n_scen == 0) throw ValidationError("nothing to aggregate: no scenario results");
  const std::size_t n_units = summary.unit_ids.size();
  std::vector<std::size_t> order(n_scen);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return summary.scenarios[a].id < summary.scenarios[b].id; });

  AggregateSummary agg;
  agg.unit_ids = summary.unit_ids;
  agg.n_scenarios = n_scen;
  for (const auto& r : summary.scenarios) {
    if (r.mean.size() != n_units) throw ValidationError("scenario '" + r.id + "' has the wrong number of units");
    agg.total_draws += r.n_draws;
  }
  if (agg.total_draws == 0) throw ValidationError("nothing to aggregate: zero draws");
  agg.global_mean.resize(n_units);
  agg.worst_case.resize(n_units);
  agg.scenario_mean_sd.resize(n_units);
  agg.global_q025.assign(n_units, std::numeric_limits<double>::quiet_NaN());
  agg.global_q975.assign(n_units, std::numeric_limits<double>::quiet_NaN());

  const double total = static_cast<double>(agg.total_draws);
  for (std::size_t u = 0; u < n_units; ++u) {
    // Draw-weighted mean of scenario means == mean over all draws.
    double sum = 0.0;
    double comp = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double plain = 0.0;
    for (std::size_t s : order) {
      const ScenarioResult& r = summary.scenarios[s];
      const double m = r.mean[u];
      const double term = (static_cast<double>(r.n_draws) / total) * m;
      const double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
      plain += m;
    }
    // A weighted mean lies within the range of its terms; clamp away rounding.
    agg.global_mean[u] = std::clamp(sum + comp, lo, hi);
    agg.worst_case[u] = hi;
    const double avg = plain / static_cast<double>(n_scen);
    double ss = 0.0;
    for (std::size_t s : order) {
      const double d = summary.scenarios[s].mean[u] - avg;
      ss += d * d;
    }
    agg.scenario_mean_sd[u] = n_scen > 1 ? std::sqrt(ss / static_cast<double>(n_scen - 1)) : 0.0;
  }

  if (source != nullptr) {
    if (source->n_scenarios() != n_scen) throw ValidationError("draw source does not match the summary");
    std::vector<double> unit_min(n_units, std::numeric_limits<double>::infinity());
    std::vector<double> unit_max(n_units, -std::numeric_limits<double>::infinity());
    for (const auto& r : summary.scenarios) {
      for (std::size_t u = 0; u < n_units; ++u) {
        unit_min[u] = std::min(unit_min[u], r.draw_min[u]);
        unit_max[u] = std::max(unit_max[u], r.draw_max[u]);
      }
    }
    const double levels[] = {0.025, 0.975};
    std::vector<std::vector<double>> pct;
    exact_percentiles(*source, n_units, agg.total_draws, unit_min, unit_max, levels, pct, threads);
    agg.global_q025 = std::move(pct[0]);
    agg.global_q975 = std::move(pct[1]);
  }
  return agg;
}

std::vector<PdfRow> scenario_pdf_table(const ScenarioSimulationSummary& summary, std::size_t n_bins) {
  std::vector<std::size_t> order(summary.scenarios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return summary.scenarios[a].id < summary.scenarios[b].id; });
  std::vector<PdfRow> rows;
  const double width = 1.0 / static_cast<double>(n_bins);
  for (std::size_t s : order) {
    const ScenarioResult& r = summary.scenarios[s];
    std::vector<std::size_t> counts(n_bins, 0);
    for (double m : r.mean) {
      const auto b = static_cast<std::size_t>(std::max(0.0, m) * static_cast<double>(n_bins));
      ++counts[std::min(b, n_bins - 1)];
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      rows.push_back({r.id, static_cast<double>(b) * width, static_cast<double>(b + 1) * width,
                      static_cast<double>(counts[b]) / (static_cast<double>(r.mean.size()) * width)});
    }
  }
  return rows;
}

}  // namespace hazardsim::scenario
