#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hazardsim/core_data.hpp"
#include "hazardsim/gam.hpp"
#include "hazardsim/lasso.hpp"

namespace hazardsim {

/// Everything a pipeline run needs. Loaded from a flat key=value file; CLI
/// flags override individual keys.
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path geojson;    // optional: joined into the report
  std::filesystem::path scenarios;  // directory or long-format CSV
  std::filesystem::path out_dir = "out";
  TableSchema schema;
  std::string trigger_col = "pga";
  std::vector<std::string> selected_covariates;  // overrides the LASSO selection when set
  std::vector<std::string> smooths;
  std::size_t bins = kDefaultBins;
  Binning binning = Binning::kEqualWidth;
  double fixed_precision = 1e-3;
  double intercept_precision = 0.0;
  double grid_min = -2.0;
  double grid_max = 8.0;
  std::size_t grid_points = 15;
  std::uint64_t seed = 1;
  std::size_t draws = 1000;
  std::size_t path_length = 100;
  std::size_t folds = 10;
  lasso::SelectionRule rule = lasso::SelectionRule::kConservative;
  bool fast_cv = false;
  bool stratified = false;
  int threads = 0;  // 0: HAZARDSIM_THREADS or hardware

  /// Sets one key; throws ValidationError for unknown keys or bad values.
  /// Relative paths are resolved against `base_dir`.
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {});

  std::vector<double> log_precision_grid() const;
  gam::GamOptions gam_options(const std::vector<std::string>& selected) const;
};

/// Parses `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);

PipelineConfig load_config(const std::filesystem::path& path);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace hazardsim
