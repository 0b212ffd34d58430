#include "hazardsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"

namespace hazardsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a nonnegative integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return csv::parse_double(value);
  } catch (const ValidationError&) {
    throw ValidationError("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ValidationError("config key '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void PipelineConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir) {
  auto path_value = [&]() {
    std::filesystem::path p(value);
    return (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
  };
  if (key == "input") {
    input = path_value();
  } else if (key == "geojson") {
    geojson = value.empty() ? std::filesystem::path{} : path_value();
  } else if (key == "scenarios") {
    scenarios = value.empty() ? std::filesystem::path{} : path_value();
  } else if (key == "out_dir") {
    out_dir = path_value();
  } else if (key == "label_col") {
    schema.label_col = value;
  } else if (key == "id_col") {
    schema.id_col = value;
  } else if (key == "covariate_cols") {
    schema.covariate_cols = split_list(value);
  } else if (key == "delimiter") {
    if (value == "tab" || value == "\\t") {
      schema.delimiter = '\t';
    } else if (value.size() == 1) {
      schema.delimiter = value[0];
    } else {
      throw ValidationError("delimiter must be a single character or 'tab'");
    }
  } else if (key == "trigger_col") {
    trigger_col = value;
  } else if (key == "selected_covariates") {
    selected_covariates = split_list(value);
  } else if (key == "smooths") {
    smooths = split_list(value);
  } else if (key == "bins") {
    bins = parse_count(key, value);
  } else if (key == "binning") {
    binning = parse_binning(value);
  } else if (key == "fixed_precision") {
    fixed_precision = parse_real(key, value);
  } else if (key == "intercept_precision") {
    intercept_precision = parse_real(key, value);
  } else if (key == "grid_min") {
    grid_min = parse_real(key, value);
  } else if (key == "grid_max") {
    grid_max = parse_real(key, value);
  } else if (key == "grid_points") {
    grid_points = parse_count(key, value);
  } else if (key == "seed") {
    seed = parse_count(key, value);
  } else if (key == "draws") {
    draws = parse_count(key, value);
  } else if (key == "path_length") {
    path_length = parse_count(key, value);
  } else if (key == "folds") {
    folds = parse_count(key, value);
  } else if (key == "rule") {
    rule = lasso::parse_rule(value);
  } else if (key == "fast_cv") {
    fast_cv = parse_bool(key, value);
  } else if (key == "stratified") {
    stratified = parse_bool(key, value);
  } else if (key == "threads") {
    threads = static_cast<int>(parse_count(key, value));
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

std::vector<double> PipelineConfig::log_precision_grid() const {
  if (grid_points == 0) throw ValidationError("grid_points must be positive");
  if (grid_points == 1) return {grid_min};
  std::vector<double> grid(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k) {
    grid[k] = grid_min + (grid_max - grid_min) * static_cast<double>(k) / static_cast<double>(grid_points - 1);
  }
  return grid;
}

gam::GamOptions PipelineConfig::gam_options(const std::vector<std::string>& selected) const {
  gam::GamOptions o;
  // Fixed effects: selected covariates plus the trigger, in schema order,
  // minus the smooth terms.
  for (const auto& c : schema.covariate_cols) {
    const bool chosen = std::find(selected.begin(), selected.end(), c) != selected.end() || c == trigger_col;
    const bool smooth = std::find(smooths.begin(), smooths.end(), c) != smooths.end();
    if (chosen && !smooth) o.fixed.push_back(c);
  }
  o.smooths = smooths;
  o.bins = bins;
  o.binning = binning;
  o.fixed_precision = fixed_precision;
  o.intercept_precision = intercept_precision;
  o.log_precision_grid = log_precision_grid();
  return o;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  PipelineConfig cfg;
  const auto base = path.parent_path();
  for (const auto& [k, v] : parse_key_values(buffer.str())) cfg.set(k, v, base);
  return cfg;
}

}  // namespace hazardsim
