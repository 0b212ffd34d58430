#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hazardsim/config.hpp"
#include "hazardsim/core_data.hpp"
#include "hazardsim/lasso.hpp"

namespace hazardsim::pipeline {

enum class Stage { kSelect, kFit, kCv, kSimulate, kAggregate, kReport };

inline constexpr std::array<Stage, 6> kStages = {Stage::kSelect,   Stage::kFit,       Stage::kCv,
                                                 Stage::kSimulate, Stage::kAggregate, Stage::kReport};

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);

/// Which stage wrote an output file, judged by its name; false for files that
/// are not pipeline artifacts.
bool stage_of_file(const std::string& filename, Stage* stage);

/// Input table per the config. CSV unless the input ends in .geojson/.json.
/// With no covariate columns configured, every CSV column other than the id
/// and label columns is a covariate.
SlopeUnitTable load_input(const PipelineConfig& config);

// Stages. Each writes into config.out_dir (created if needed) and returns the
// names of the files it wrote.

/// lasso_path.csv, selection.json
std::vector<std::string> run_select(const PipelineConfig& config);

/// Covariates for the GAM: the config override, else selection.json in the
/// output directory, else every covariate.
std::vector<std::string> selected_covariates(const PipelineConfig& config);

/// model.bin, fixed_effects.csv, smooth_<name>.csv, benchmark_summary.csv
std::vector<std::string> run_fit(const PipelineConfig& config);

/// cv_roc_fold<k>.csv, cv_auc.csv, oof_predictions.csv
std::vector<std::string> run_cv(const PipelineConfig& config);

struct SimulateRequest {
  std::filesystem::path model;
  std::filesystem::path scenarios;
  std::filesystem::path out_dir;
  std::size_t draws = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool write_scenarios = true;  // scenario_<id>_summary.csv, scenario_pdf_table.csv
  bool write_aggregate = true;  // aggregate_summary.csv
};

std::vector<std::string> run_simulate(const SimulateRequest& request);

struct ReportRequest {
  std::filesystem::path out_dir;
  std::filesystem::path geojson;  // optional
  std::string id_col = "unit_id";
};

/// error_plot.csv, error_plot_bins.csv from benchmark_summary.csv; with a
/// GeoJSON input, report.geojson (aggregate summary joined by unit id) or
/// benchmark.geojson when there is no aggregate summary.
std::vector<std::string> run_report(const ReportRequest& request);

/// Checks everything the requested stages need before any compute. Throws
/// ValidationError (or IoError for unreadable paths).
void validate(const PipelineConfig& config, Stage from, Stage to);

std::string sha256_file(const std::filesystem::path& path);

/// Writes manifest.json: one entry per stage with every artifact currently in
/// the output directory and its SHA-256.
void write_manifest(const std::filesystem::path& out_dir, std::uint64_t seed);

/// Runs stages from..to in order and writes the manifest. Earlier stages are
/// taken from persisted artifacts. Errors are rethrown prefixed with the stage
/// name; files already written are kept.
void run_pipeline(const PipelineConfig& config, Stage from = Stage::kSelect, Stage to = Stage::kReport);

/// Deterministic per-purpose seeds derived from the run seed.
std::uint64_t stage_seed(std::uint64_t seed, std::string_view purpose);

inline constexpr std::string_view kBenchmarkId = "benchmark";

}  // namespace hazardsim::pipeline
