#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hazardsim/core_data.hpp"
#include "hazardsim/gam.hpp"

namespace hazardsim::scenario {

/// Trigger values per scenario, aligned to a fixed unit order.
struct ScenarioSet {
  std::vector<std::string> unit_ids;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> pga;  // [scenario][unit], in g

  std::size_t size() const noexcept { return ids.size(); }
};

/// `source` is either a directory of per-scenario CSVs (`unit_id,pga`, the
/// scenario id being the file stem) or one CSV in long format
/// (`scenario_id,unit_id,pga`). Every scenario must cover every unit exactly
/// once. Values are not range-checked here; negative PGA is rejected when the
/// scenario is plugged in.
ScenarioSet load_scenarios(const std::filesystem::path& source, std::span<const std::string> unit_ids);

/// A fitted model bound to the units it will predict for, with the fixed-effect
/// column (`trigger`) that scenarios replace.
class PredictionContext {
 public:
  PredictionContext(gam::GamModel model, SlopeUnitTable units, std::string trigger);

  const gam::GamModel& model() const noexcept { return model_; }
  const SlopeUnitTable& units() const noexcept { return units_; }
  const std::string& trigger() const noexcept { return trigger_; }
  /// Model matrix with the units' own trigger values.
  const Eigen::MatrixXd& base_matrix() const noexcept { return base_.matrix; }
  std::size_t clamped() const noexcept { return base_.clamped; }
  Eigen::Index trigger_column() const noexcept { return trigger_column_; }
  std::size_t trigger_scaler_index() const noexcept { return scaler_index_; }

 private:
  gam::GamModel model_;
  SlopeUnitTable units_;
  std::string trigger_;
  gam::ModelMatrix base_;
  Eigen::Index trigger_column_ = 0;
  std::size_t scaler_index_ = 0;
};

struct PluggedDesign {
  Eigen::MatrixXd matrix;
  std::vector<bool> extrapolated;  // |z| > kExtrapolationZ for the trigger
  std::size_t n_extrapolated = 0;
};

/// Replaces the trigger column with `pga` standardized by the training scaler.
/// Smooth inputs are untouched. Throws ValidationError on a length mismatch or
/// a negative value.
PluggedDesign plug_in(const PredictionContext& context, std::span<const double> pga);

/// Per-scenario stream seed: depends on the run seed and the scenario id only.
std::uint64_t scenario_seed(std::uint64_t seed, std::string_view scenario_id);

/// Susceptibility for every draw and unit, n_draws x n_units (column u holds
/// unit u's draws contiguously). Deterministic given (posterior, matrix, seed).
Eigen::MatrixXd susceptibility_draws(const gam::GamPosterior& posterior, const Eigen::MatrixXd& matrix,
                                     std::size_t n_draws, std::uint64_t stream_seed);

/// Percentile with linear interpolation between order statistics at
/// zero-based rank p (n - 1). Reorders `values`.
double percentile(std::span<double> values, double p);

struct ScenarioResult {
  std::string id;
  std::size_t n_draws = 0;
  std::vector<double> mean;
  std::vector<double> q025;
  std::vector<double> median;
  std::vector<double> q975;
  std::vector<double> width;  // q975 - q025
  std::vector<double> draw_min;
  std::vector<double> draw_max;
  std::size_t n_extrapolated = 0;
};

ScenarioResult simulate_scenario(const gam::GamPosterior& posterior, const Eigen::MatrixXd& matrix,
                                 std::size_t n_draws, std::uint64_t stream_seed, std::string id = {});

struct ScenarioSimulationSummary {
  std::vector<std::string> unit_ids;
  std::size_t n_draws = 0;
  std::uint64_t seed = 0;
  std::vector<ScenarioResult> scenarios;                     // input order, failures omitted
  std::vector<std::pair<std::string, std::string>> failures;  // (scenario id, message)
};

/// Scenario s is simulated with scenario_seed(seed, id_s), so results do not
/// depend on input order or thread count. A failing scenario is recorded in
/// `failures` and the rest still run.
ScenarioSimulationSummary run_all_scenarios(const PredictionContext& context, const ScenarioSet& scenarios,
                                            std::size_t n_draws, std::uint64_t seed, std::size_t threads = 1);

/// Regenerates the susceptibility draws of one scenario on demand.
class DrawSource {
 public:
  virtual ~DrawSource() = default;
  virtual std::size_t n_scenarios() const = 0;
  /// n_draws x n_units for scenario `index` (index into the summary's scenarios).
  virtual Eigen::MatrixXd draws(std::size_t index) const = 0;
};

/// Regenerates draws from the model and the scenario trigger values.
class ModelDrawSource final : public DrawSource {
 public:
  ModelDrawSource(const PredictionContext& context, const ScenarioSet& scenarios,
                  const ScenarioSimulationSummary& summary);
  std::size_t n_scenarios() const override { return order_.size(); }
  Eigen::MatrixXd draws(std::size_t index) const override;

 private:
  const PredictionContext& context_;
  const ScenarioSet& scenarios_;
  const ScenarioSimulationSummary& summary_;
  std::vector<std::size_t> order_;  // summary index -> scenario set index
};

struct AggregateSummary {
  std::vector<std::string> unit_ids;
  std::vector<double> global_mean;       // over all scenario x draw values
  std::vector<double> global_q025;       // NaN without a draw source
  std::vector<double> global_q975;
  std::vector<double> worst_case;        // max over scenarios of the scenario mean
  std::vector<double> scenario_mean_sd;  // spread of scenario means
  std::size_t n_scenarios = 0;
  std::size_t total_draws = 0;
};

/// Reduces in scenario-id order, so the result is independent of input order.
/// When `source` is given, global percentiles are computed exactly over all
/// draws by histogram refinement passes over regenerated draws, keeping at
/// most a bounded number of candidate values per unit in memory.
AggregateSummary aggregate(const ScenarioSimulationSummary& summary, const DrawSource* source = nullptr,
                           std::size_t threads = 1);

struct PdfRow {
  std::string scenario_id;
  double lower = 0.0;
  double upper = 0.0;
  double density = 0.0;
};

/// Density histogram of per-unit mean susceptibility, per scenario, sorted by id.
std::vector<PdfRow> scenario_pdf_table(const ScenarioSimulationSummary& summary, std::size_t n_bins = 50);

}  // namespace hazardsim::scenario
