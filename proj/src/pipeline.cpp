#include "hazardsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"
#include "hazardsim/gam.hpp"
#include "hazardsim/geojson.hpp"
#include "hazardsim/model_io.hpp"
#include "hazardsim/parallel.hpp"
#include "hazardsim/rng.hpp"
#include "hazardsim/scenario.hpp"
#include "hazardsim/validation.hpp"

namespace hazardsim::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFile = "model.bin";
constexpr const char* kSelectionFile = "selection.json";
constexpr const char* kBenchmarkFile = "benchmark_summary.csv";
constexpr const char* kAggregateFile = "aggregate_summary.csv";

void log(std::string_view stage, const std::string& message) {
  std::cerr << "[" << stage << "] " << message << "\n";
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }
bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_summary(const fs::path& path, const std::vector<std::string>& unit_ids,
                   const scenario::ScenarioResult& r) {
  csv::Writer w(path);
  w.row({"unit_id", "mean", "q025", "q975", "width"});
  for (std::size_t u = 0; u < unit_ids.size(); ++u) {
    w.field(unit_ids[u]).field(r.mean[u]).field(r.q025[u]).field(r.q975[u]).field(r.width[u]);
    w.end_row();
  }
}

// File-name-safe scenario id.
std::string file_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

std::size_t threads_of(const PipelineConfig& config) { return resolve_threads(config.threads); }

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kSelect: return "select";
    case Stage::kFit: return "fit";
    case Stage::kCv: return "cv";
    case Stage::kSimulate: return "simulate";
    case Stage::kAggregate: return "aggregate";
    case Stage::kReport: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : kStages) {
    if (stage_name(s) == name) return s;
  }
  throw ValidationError("unknown stage '" + std::string(name) + "' (select|fit|cv|simulate|aggregate|report)");
}

bool stage_of_file(const std::string& f, Stage* stage) {
  Stage s;
  if (f == "lasso_path.csv" || f == kSelectionFile) {
    s = Stage::kSelect;
  } else if (f == kModelFile || f == "fixed_effects.csv" || f == kBenchmarkFile || f == "hyperparameters.csv" ||
             (starts_with(f, "smooth_") && ends_with(f, ".csv"))) {
    s = Stage::kFit;
  } else if (f == "cv_auc.csv" || f == "oof_predictions.csv" || (starts_with(f, "cv_roc_fold") && ends_with(f, ".csv"))) {
    s = Stage::kCv;
  } else if (f == "scenario_pdf_table.csv" || (starts_with(f, "scenario_") && ends_with(f, "_summary.csv"))) {
    s = Stage::kSimulate;
  } else if (f == kAggregateFile) {
    s = Stage::kAggregate;
  } else if (f == "error_plot.csv" || f == "error_plot_bins.csv" || f == "report.geojson" ||
             f == "benchmark.geojson") {
    s = Stage::kReport;
  } else {
    return false;
  }
  if (stage) *stage = s;
  return true;
}

std::uint64_t stage_seed(std::uint64_t seed, std::string_view purpose) { return rng::derive(seed, purpose); }

SlopeUnitTable load_input(const PipelineConfig& config) {
  if (config.input.empty()) throw ValidationError("no input table configured");
  const std::string ext = lower_extension(config.input);
  if (ext == ".geojson" || ext == ".json") return load_table_geojson(config.input, config.schema);
  TableSchema schema = config.schema;
  if (schema.covariate_cols.empty()) {
    const csv::Document doc = csv::read(config.input, schema.delimiter);
    for (const auto& h : doc.header) {
      if (h != schema.id_col && h != schema.label_col) schema.covariate_cols.push_back(h);
    }
  }
  return load_table(config.input, schema);
}

std::vector<std::string> run_select(const PipelineConfig& config) {
  const SlopeUnitTable table = load_input(config);
  const Scaler scaler = fit_scaler(table, table.column_names());
  const StandardizedDesign design = apply_scaler(scaler, table);
  lasso::PathOptions options;
  options.length = config.path_length;
  options.folds = config.folds;
  options.seed = stage_seed(config.seed, "lasso");
  options.threads = threads_of(config);
  const lasso::LassoPath path = lasso::lasso_path_cv(design, table.labels(), options);
  const lasso::SelectionResult sel = lasso::select_covariates(path, config.rule);

  fs::create_directories(config.out_dir);
  {
    csv::Writer w(config.out_dir / "lasso_path.csv");
    w.field("lambda").field("auc_mean").field("auc_sd").field("nonzero_count").field("(intercept)");
    for (const auto& c : path.covariates) w.field(c);
    w.end_row();
    for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
      w.field(path.lambdas[l]).field(path.cv_auc_mean[l]).field(path.cv_auc_sd[l]).field(path.nonzero_counts[l]);
      for (Eigen::Index j = 0; j < path.coefficients.cols(); ++j) {
        w.field(path.coefficients(static_cast<Eigen::Index>(l), j));
      }
      w.end_row();
    }
  }
  nlohmann::ordered_json j;
  j["rule"] = lasso::to_string(sel.rule);
  j["lambda"] = sel.lambda;
  j["lambda_index"] = sel.index;
  j["auc_mean"] = path.cv_auc_mean[sel.index];
  j["auc_sd"] = path.cv_auc_sd[sel.index];
  j["covariates"] = sel.covariates;
  std::ofstream out(config.out_dir / kSelectionFile);
  if (!out) throw IoError("cannot write " + (config.out_dir / kSelectionFile).string());
  out << j.dump(2) << "\n";
  std::string names;
  for (const auto& c : sel.covariates) names += (names.empty() ? "" : ",") + c;
  log("select", "lambda " + csv::format_double(sel.lambda) + " keeps " + names);
  return {"lasso_path.csv", kSelectionFile};
}

std::vector<std::string> selected_covariates(const PipelineConfig& config) {
  if (!config.selected_covariates.empty()) return config.selected_covariates;
  const fs::path sel = config.out_dir / kSelectionFile;
  if (fs::exists(sel)) {
    std::ifstream in(sel);
    nlohmann::json j;
    try {
      in >> j;
      return j.at("covariates").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(sel.string() + ": " + e.what());
    }
  }
  return config.schema.covariate_cols;
}

namespace {

gam::GamOptions fit_options_for(const PipelineConfig& config, const SlopeUnitTable& table) {
  PipelineConfig cfg = config;
  if (cfg.schema.covariate_cols.empty()) cfg.schema.covariate_cols = table.column_names();
  std::vector<std::string> selected = selected_covariates(cfg);
  if (selected.empty()) selected = cfg.schema.covariate_cols;
  if (!table.has_column(cfg.trigger_col)) {
    throw ValidationError("trigger column '" + cfg.trigger_col + "' is not a covariate of the input table");
  }
  if (std::find(cfg.smooths.begin(), cfg.smooths.end(), cfg.trigger_col) != cfg.smooths.end()) {
    throw ValidationError("trigger column '" + cfg.trigger_col + "' must be a fixed effect, not a smooth");
  }
  return cfg.gam_options(selected);
}

}  // namespace

std::vector<std::string> run_fit(const PipelineConfig& config) {
  const SlopeUnitTable table = load_input(config);
  const gam::GamOptions options = fit_options_for(config, table);
  const gam::GamSpec spec = gam::make_spec(options, table);
  const gam::GamModel model = gam::fit_gam(spec, table);
  fs::create_directories(config.out_dir);
  std::vector<std::string> written;

  save_model(config.out_dir / kModelFile, StoredModel{model, table, config.trigger_col});
  written.emplace_back(kModelFile);

  const gam::GamPosterior& post = model.posterior;
  const Eigen::VectorXd sd = post.sd();
  {
    csv::Writer w(config.out_dir / "fixed_effects.csv");
    w.row({"name", "mean", "sd", "q025", "q975"});
    for (std::size_t c = 0; c < post.columns.size(); ++c) {
      if (post.columns[c].kind == gam::TermKind::kSmooth) continue;
      const auto i = static_cast<Eigen::Index>(c);
      w.field(post.columns[c].term).field(post.mode(i)).field(sd(i));
      w.field(post.mode(i) - gam::kZ975 * sd(i)).field(post.mode(i) + gam::kZ975 * sd(i));
      w.end_row();
    }
  }
  written.emplace_back("fixed_effects.csv");
  for (const auto& s : spec.smooths) {
    const std::string name = "smooth_" + file_id(s.covariate) + ".csv";
    csv::Writer w(config.out_dir / name);
    w.row({"midpoint", "mean", "q025", "q975"});
    for (std::size_t c = 0; c < post.columns.size(); ++c) {
      const auto& info = post.columns[c];
      if (info.kind != gam::TermKind::kSmooth || info.term != s.covariate) continue;
      const auto i = static_cast<Eigen::Index>(c);
      w.field(s.midpoint(info.class_index)).field(post.mode(i));
      w.field(post.mode(i) - gam::kZ975 * sd(i)).field(post.mode(i) + gam::kZ975 * sd(i));
      w.end_row();
    }
    written.push_back(name);
  }
  {
    csv::Writer w(config.out_dir / "hyperparameters.csv");
    w.field("point");
    for (const auto& s : spec.smooths) w.field("log_precision_" + s.covariate);
    w.field("log_marginal").field("selected");
    w.end_row();
    for (std::size_t g = 0; g < post.grid_points.size(); ++g) {
      w.field(g);
      for (double v : post.grid_points[g]) w.field(v);
      w.field(post.log_marginal[g]).field(post.grid_points[g] == post.smooth_log_precisions ? 1 : 0);
      w.end_row();
    }
  }
  written.emplace_back("hyperparameters.csv");

  // Benchmark: the fitted model with the units' own trigger values, seeded as
  // a scenario with id "benchmark".
  const scenario::PredictionContext ctx(model, table, config.trigger_col);
  const auto bench = scenario::simulate_scenario(post, ctx.base_matrix(), config.draws,
                                                 scenario::scenario_seed(config.seed, kBenchmarkId),
                                                 std::string(kBenchmarkId));
  write_summary(config.out_dir / kBenchmarkFile, table.unit_ids(), bench);
  written.emplace_back(kBenchmarkFile);
  log("fit", std::to_string(spec.n_coefficients()) + " coefficients, " + std::to_string(post.grid_points.size()) +
                 " hyperparameter points");
  return written;
}

std::vector<std::string> run_cv(const PipelineConfig& config) {
  const SlopeUnitTable table = load_input(config);
  const gam::GamOptions options = fit_options_for(config, table);
  const validation::FoldPlan plan = validation::make_folds(table.n_units(), config.folds, stage_seed(config.seed, "cv"),
                                                           table.labels(), config.stratified);
  validation::CvOptions cv;
  cv.threads = threads_of(config);
  if (config.fast_cv && !options.smooths.empty()) {
    const fs::path model_path = config.out_dir / kModelFile;
    if (fs::exists(model_path)) {
      cv.fixed_log_precisions = load_model(model_path).model.posterior.smooth_log_precisions;
    } else {
      const gam::GamModel full = gam::fit_gam(gam::make_spec(options, table), table);
      cv.fixed_log_precisions = full.posterior.smooth_log_precisions;
    }
  }
  const validation::CvResult result = validation::cross_validate(options, table, plan, cv);

  fs::create_directories(config.out_dir);
  std::vector<std::string> written;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const std::string name = "cv_roc_fold" + std::to_string(f + 1) + ".csv";
    csv::Writer w(config.out_dir / name);
    w.row({"threshold", "fpr", "tpr"});
    const auto& roc = result.folds[f];
    for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
      w.field(roc.thresholds[i]).field(roc.fpr[i]).field(roc.tpr[i]);
      w.end_row();
    }
    written.push_back(name);
  }
  {
    csv::Writer w(config.out_dir / "cv_auc.csv");
    w.row({"fold", "auc"});
    for (std::size_t f = 0; f < plan.k; ++f) {
      w.field(f + 1).field(result.fold_auc[f]);
      w.end_row();
    }
  }
  written.emplace_back("cv_auc.csv");
  {
    csv::Writer w(config.out_dir / "oof_predictions.csv");
    w.row({"unit_id", "score"});
    for (std::size_t i = 0; i < table.n_units(); ++i) {
      w.field(table.unit_ids()[i]).field(result.out_of_fold[i]);
      w.end_row();
    }
  }
  written.emplace_back("oof_predictions.csv");
  log("cv", "median AUC " + csv::format_double(result.median_auc));
  return written;
}

std::vector<std::string> run_simulate(const SimulateRequest& request) {
  if (request.draws < 2) throw ValidationError("draws must be at least 2");
  const StoredModel stored = load_model(request.model);
  const scenario::PredictionContext ctx(stored.model, stored.units, stored.trigger);
  const scenario::ScenarioSet set = scenario::load_scenarios(request.scenarios, stored.units.unit_ids());
  const auto summary = scenario::run_all_scenarios(ctx, set, request.draws, request.seed, request.threads);
  fs::create_directories(request.out_dir);
  std::vector<std::string> written;
  if (request.write_scenarios) {
    for (const auto& r : summary.scenarios) {
      const std::string name = "scenario_" + file_id(r.id) + "_summary.csv";
      write_summary(request.out_dir / name, summary.unit_ids, r);
      written.push_back(name);
      if (r.n_extrapolated > 0) {
        log("simulate", "scenario " + r.id + ": " + std::to_string(r.n_extrapolated) +
                            " units with trigger beyond the training range");
      }
    }
    if (!summary.scenarios.empty()) {
      csv::Writer w(request.out_dir / "scenario_pdf_table.csv");
      w.row({"scenario_id", "lower", "upper", "density"});
      for (const auto& row : scenario::scenario_pdf_table(summary)) {
        w.field(row.scenario_id).field(row.lower).field(row.upper).field(row.density);
        w.end_row();
      }
      written.emplace_back("scenario_pdf_table.csv");
    }
  }
  if (request.write_aggregate && !summary.scenarios.empty()) {
    const scenario::ModelDrawSource source(ctx, set, summary);
    const auto agg = scenario::aggregate(summary, &source, request.threads);
    csv::Writer w(request.out_dir / kAggregateFile);
    w.row({"unit_id", "global_mean", "global_q025", "global_q975", "worst_case", "scenario_mean_sd"});
    for (std::size_t u = 0; u < agg.unit_ids.size(); ++u) {
      w.field(agg.unit_ids[u]).field(agg.global_mean[u]).field(agg.global_q025[u]).field(agg.global_q975[u]);
      w.field(agg.worst_case[u]).field(agg.scenario_mean_sd[u]);
      w.end_row();
    }
    written.emplace_back(kAggregateFile);
  }
  if (!summary.failures.empty()) {
    std::string msg = std::to_string(summary.failures.size()) + " scenario(s) failed:";
    for (const auto& [id, what] : summary.failures) msg += " " + id + " (" + what + ");";
    throw ValidationError(msg);
  }
  log("simulate", std::to_string(summary.scenarios.size()) + " scenarios x " + std::to_string(request.draws) +
                      " draws x " + std::to_string(summary.unit_ids.size()) + " units");
  return written;
}

std::vector<std::string> run_report(const ReportRequest& request) {
  const fs::path bench = request.out_dir / kBenchmarkFile;
  if (!fs::exists(bench)) throw ValidationError("report needs " + bench.string() + " (run fit first)");
  const csv::Document doc = csv::read(bench);
  const std::size_t id_col = doc.find("unit_id");
  const std::size_t mean_col = doc.find("mean");
  const std::size_t width_col = doc.find("width");
  if (id_col == std::string::npos || mean_col == std::string::npos || width_col == std::string::npos) {
    throw ValidationError(bench.string() + " lacks unit_id/mean/width columns");
  }
  std::vector<double> mean;
  std::vector<double> width;
  for (const auto& row : doc.rows) {
    mean.push_back(csv::parse_double(row[mean_col]));
    width.push_back(csv::parse_double(row[width_col]));
  }
  const validation::ErrorPlot plot = validation::error_plot_table(mean, width);
  std::vector<std::string> written;
  {
    csv::Writer w(request.out_dir / "error_plot.csv");
    w.row({"unit_id", "mean", "width", "bin"});
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
      w.field(doc.rows[i][id_col]).field(mean[i]).field(width[i]).field(validation::error_plot_bin(mean[i]) + 1);
      w.end_row();
    }
  }
  written.emplace_back("error_plot.csv");
  {
    csv::Writer w(request.out_dir / "error_plot_bins.csv");
    w.row({"bin", "lower", "upper", "count", "median_width"});
    for (std::size_t b = 0; b < plot.bins.size(); ++b) {
      const auto& bin = plot.bins[b];
      w.field(b + 1).field(bin.lower).field(bin.upper).field(bin.count).field(bin.median_width);
      w.end_row();
    }
  }
  written.emplace_back("error_plot_bins.csv");

  if (!request.geojson.empty()) {
    const fs::path agg = request.out_dir / kAggregateFile;
    const bool have_agg = fs::exists(agg);
    const std::string out_name = have_agg ? "report.geojson" : "benchmark.geojson";
    const JoinReport rep = join_geojson(have_agg ? agg : bench, request.geojson, request.out_dir / out_name,
                                        request.id_col);
    if (rep.unmatched > 0) {
      log("report", "warning: " + std::to_string(rep.unmatched) + " of " + std::to_string(rep.features) +
                        " features have no summary row");
    }
    written.push_back(out_name);
  }
  return written;
}

void validate(const PipelineConfig& config, Stage from, Stage to) {
  if (static_cast<int>(from) > static_cast<int>(to)) throw ValidationError("--from stage comes after --to stage");
  auto wants = [&](Stage s) { return static_cast<int>(from) <= static_cast<int>(s) && static_cast<int>(s) <= static_cast<int>(to); };
  if (config.seed == 0) throw ValidationError("seed must be positive");
  if (config.draws < 2) throw ValidationError("draws must be at least 2");
  if (config.folds < 2) throw ValidationError("folds must be at least 2");
  if (config.path_length == 0) throw ValidationError("path_length must be positive");
  if (config.bins < 3 && !config.smooths.empty()) throw ValidationError("bins must be at least 3");
  if (wants(Stage::kSelect) || wants(Stage::kFit) || wants(Stage::kCv)) {
    if (config.input.empty()) throw ValidationError("config is missing 'input'");
    if (!fs::exists(config.input)) throw ValidationError("input not found: " + config.input.string());
  }
  if (wants(Stage::kSimulate) || wants(Stage::kAggregate)) {
    if (config.scenarios.empty()) throw ValidationError("config is missing 'scenarios' (needed by simulate)");
    if (!fs::exists(config.scenarios)) throw ValidationError("scenarios not found: " + config.scenarios.string());
    if (!wants(Stage::kFit) && !fs::exists(config.out_dir / kModelFile)) {
      throw ValidationError("no " + (config.out_dir / kModelFile).string() + " to resume from (run fit first)");
    }
  }
  if (wants(Stage::kReport)) {
    if (!config.geojson.empty() && !fs::exists(config.geojson)) {
      throw ValidationError("geojson not found: " + config.geojson.string());
    }
    if (!wants(Stage::kFit) && !fs::exists(config.out_dir / kBenchmarkFile)) {
      throw ValidationError("no " + (config.out_dir / kBenchmarkFile).string() + " to resume from (run fit first)");
    }
  }
  config.log_precision_grid();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("SHA-256 unavailable");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

void write_manifest(const fs::path& out_dir, std::uint64_t seed) {
  std::vector<std::vector<std::string>> files(kStages.size());
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    Stage s;
    if (stage_of_file(name, &s)) files[static_cast<std::size_t>(s)].push_back(name);
  }
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["seed"] = seed;
  j["stages"] = nlohmann::ordered_json::array();
  for (Stage s : kStages) {
    auto& list = files[static_cast<std::size_t>(s)];
    std::sort(list.begin(), list.end());
    nlohmann::ordered_json stage;
    stage["stage"] = stage_name(s);
    stage["outputs"] = nlohmann::ordered_json::array();
    for (const auto& name : list) {
      stage["outputs"].push_back({{"file", name},
                                  {"bytes", fs::file_size(out_dir / name)},
                                  {"sha256", sha256_file(out_dir / name)}});
    }
    j["stages"].push_back(std::move(stage));
  }
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (out_dir / "manifest.json").string());
  out << j.dump(2) << "\n";
}

void run_pipeline(const PipelineConfig& config, Stage from, Stage to) {
  validate(config, from, to);
  fs::create_directories(config.out_dir);
  auto wants = [&](Stage s) { return static_cast<int>(from) <= static_cast<int>(s) && static_cast<int>(s) <= static_cast<int>(to); };
  auto guarded = [](Stage s, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      throw Error("stage " + std::string(stage_name(s)) + ": " + e.what(), e.code());
    } catch (const std::exception& e) {
      throw IoError("stage " + std::string(stage_name(s)) + ": " + e.what());
    }
  };
  if (wants(Stage::kSelect)) {
    if (config.selected_covariates.empty()) {
      guarded(Stage::kSelect, [&] { run_select(config); });
    } else {
      log("select", "skipped: covariates given in the config");
    }
  }
  if (wants(Stage::kFit)) guarded(Stage::kFit, [&] { run_fit(config); });
  if (wants(Stage::kCv)) guarded(Stage::kCv, [&] { run_cv(config); });
  if (wants(Stage::kSimulate) || wants(Stage::kAggregate)) {
    // One pass serves both stages: the aggregate regenerates the same draws.
    SimulateRequest req;
    req.model = config.out_dir / kModelFile;
    req.scenarios = config.scenarios;
    req.out_dir = config.out_dir;
    req.draws = config.draws;
    req.seed = config.seed;
    req.threads = threads_of(config);
    req.write_scenarios = wants(Stage::kSimulate);
    req.write_aggregate = wants(Stage::kAggregate);
    guarded(wants(Stage::kSimulate) ? Stage::kSimulate : Stage::kAggregate, [&] { run_simulate(req); });
  }
  if (wants(Stage::kReport)) {
    guarded(Stage::kReport, [&] { run_report({config.out_dir, config.geojson, config.schema.id_col}); });
  }
  write_manifest(config.out_dir, config.seed);
}

}  // namespace hazardsim::pipeline
