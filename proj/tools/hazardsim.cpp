// hazardsim command-line interface.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hazardsim/config.hpp"
#include "hazardsim/error.hpp"
#include "hazardsim/parallel.hpp"
#include "hazardsim/pipeline.hpp"
#include "hazardsim/synth.hpp"

namespace {

using namespace hazardsim;

struct CommonFlags {
  std::string config;
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_input = true) {
  cmd->add_option("--config", f.config, "key=value configuration file");
  if (with_input) cmd->add_option("--input", f.input, "slope-unit table (CSV or GeoJSON)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--threads", f.threads, "worker threads (default: HAZARDSIM_THREADS, else all cores)");
}

PipelineConfig resolve(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : load_config(f.config);
  if (!f.input.empty()) cfg.input = f.input;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based landslide hazard: LASSO selection, Bayesian GAM fit, cross-validation and "
               "Monte Carlo simulation over ground-motion scenarios"};
  app.require_subcommand(1);

  // synth
  synth::SynthOptions so;
  std::string synth_out = "synthetic";
  std::string shape = "sine";
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic slope-unit dataset with scenarios");
  synth_cmd->add_option("--out", synth_out, "output directory");
  synth_cmd->add_option("--n-units", so.n_units, "number of slope units");
  synth_cmd->add_option("--noise-covariates", so.n_noise, "covariates without effect");
  synth_cmd->add_option("--coefficients", so.coefficients,
                        "intercept and effects of su_area, vrm_mean, vrm_sd, pga (standardized scale)")
      ->delimiter(',');
  synth_cmd->add_option("--shape", shape, "slope_sd effect shape: sine|flat|step");
  synth_cmd->add_option("--amplitude", so.smooth_amplitude, "smooth effect amplitude (logit scale)");
  synth_cmd->add_option("--scenarios", so.n_scenarios, "number of scenarios");
  synth_cmd->add_option("--seed", so.seed, "generator seed");

  // select
  CommonFlags select_flags;
  std::string rule;
  std::optional<std::size_t> path_length;
  auto* select_cmd = app.add_subcommand("select", "LASSO path with cross-validated AUC and covariate selection");
  add_common(select_cmd, select_flags);
  select_cmd->add_option("--rule", rule, "conservative|max-auc");
  select_cmd->add_option("--path-length", path_length, "number of lambda values");

  // fit
  CommonFlags fit_flags;
  std::string smooths;
  std::optional<std::size_t> bins;
  std::string binning;
  std::optional<std::size_t> fit_draws;
  auto* fit_cmd = app.add_subcommand("fit", "fit the Bayesian GAM and the benchmark susceptibility");
  add_common(fit_cmd, fit_flags);
  fit_cmd->add_option("--smooths", smooths, "comma-separated covariates with RW1 smooths");
  fit_cmd->add_option("--bins", bins, "classes per smooth");
  fit_cmd->add_option("--binning", binning, "equal|quantile");
  fit_cmd->add_option("--draws", fit_draws, "posterior draws for the benchmark summary");

  // cv
  CommonFlags cv_flags;
  bool fast_cv = false;
  bool stratified = false;
  std::optional<std::size_t> folds;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation of the GAM");
  add_common(cv_cmd, cv_flags);
  cv_cmd->add_flag("--fast-cv", fast_cv, "reuse the full-data smoothing precisions in every fold");
  cv_cmd->add_flag("--stratified", stratified, "balance presences across folds");
  cv_cmd->add_option("--folds", folds, "number of folds");

  // simulate / aggregate
  CommonFlags sim_flags;
  std::string model_path;
  std::string scenarios;
  std::optional<std::size_t> draws;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate susceptibility under each scenario");
  add_common(sim_cmd, sim_flags, false);
  sim_cmd->add_option("--model", model_path, "fitted model (model.bin)");
  sim_cmd->add_option("--scenarios", scenarios, "directory of <id>.csv or long-format CSV");
  sim_cmd->add_option("--draws", draws, "posterior draws per scenario");

  CommonFlags agg_flags;
  std::string agg_model;
  std::string agg_scenarios;
  std::optional<std::size_t> agg_draws;
  auto* agg_cmd = app.add_subcommand("aggregate", "regenerate the all-scenario aggregate summary");
  add_common(agg_cmd, agg_flags, false);
  agg_cmd->add_option("--model", agg_model, "fitted model (model.bin)");
  agg_cmd->add_option("--scenarios", agg_scenarios, "directory of <id>.csv or long-format CSV");
  agg_cmd->add_option("--draws", agg_draws, "posterior draws per scenario");

  // report
  CommonFlags report_flags;
  std::string geojson;
  auto* report_cmd = app.add_subcommand("report", "error-plot tables and GeoJSON join");
  add_common(report_cmd, report_flags, false);
  report_cmd->add_option("--geojson", geojson, "slope-unit geometries to join results onto");

  // run
  CommonFlags run_flags;
  std::string from = "select";
  std::string to = "report";
  auto* run_cmd = app.add_subcommand("run", "run the whole pipeline and write manifest.json");
  add_common(run_cmd, run_flags);
  run_cmd->add_option("--from", from, "first stage (earlier stages are read from --out)");
  run_cmd->add_option("--to", to, "last stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
  }

  try {
    if (synth_cmd->parsed()) {
      so.shape = synth::parse_shape(shape);
      synth::write(synth::generate(so), synth_out);
      std::cerr << "wrote synthetic dataset to " << synth_out << "\n";
    } else if (select_cmd->parsed()) {
      PipelineConfig cfg = resolve(select_flags);
      if (!rule.empty()) cfg.rule = lasso::parse_rule(rule);
      if (path_length) cfg.path_length = *path_length;
      pipeline::validate(cfg, pipeline::Stage::kSelect, pipeline::Stage::kSelect);
      pipeline::run_select(cfg);
    } else if (fit_cmd->parsed()) {
      PipelineConfig cfg = resolve(fit_flags);
      if (!smooths.empty()) cfg.smooths = split_list(smooths);
      if (bins) cfg.bins = *bins;
      if (!binning.empty()) cfg.binning = parse_binning(binning);
      if (fit_draws) cfg.draws = *fit_draws;
      pipeline::validate(cfg, pipeline::Stage::kFit, pipeline::Stage::kFit);
      pipeline::run_fit(cfg);
    } else if (cv_cmd->parsed()) {
      PipelineConfig cfg = resolve(cv_flags);
      if (fast_cv) cfg.fast_cv = true;
      if (stratified) cfg.stratified = true;
      if (folds) cfg.folds = *folds;
      pipeline::validate(cfg, pipeline::Stage::kCv, pipeline::Stage::kCv);
      pipeline::run_cv(cfg);
    } else if (sim_cmd->parsed() || agg_cmd->parsed()) {
      const bool is_sim = sim_cmd->parsed();
      PipelineConfig cfg = resolve(is_sim ? sim_flags : agg_flags);
      const std::string& m = is_sim ? model_path : agg_model;
      const std::string& s = is_sim ? scenarios : agg_scenarios;
      const auto& d = is_sim ? draws : agg_draws;
      if (!s.empty()) cfg.scenarios = s;
      if (d) cfg.draws = *d;
      pipeline::SimulateRequest req;
      req.model = m.empty() ? cfg.out_dir / "model.bin" : std::filesystem::path(m);
      req.scenarios = cfg.scenarios;
      req.out_dir = cfg.out_dir;
      req.draws = cfg.draws;
      req.seed = cfg.seed;
      req.threads = resolve_threads(cfg.threads);
      req.write_scenarios = is_sim;
      if (req.scenarios.empty()) throw ValidationError("--scenarios is required");
      if (!std::filesystem::exists(req.scenarios)) throw ValidationError("scenarios not found: " + req.scenarios.string());
      if (!std::filesystem::exists(req.model)) throw ValidationError("model not found: " + req.model.string());
      pipeline::run_simulate(req);
    } else if (report_cmd->parsed()) {
      PipelineConfig cfg = resolve(report_flags);
      if (!geojson.empty()) cfg.geojson = geojson;
      pipeline::run_report({cfg.out_dir, cfg.geojson, cfg.schema.id_col});
    } else if (run_cmd->parsed()) {
      const PipelineConfig cfg = resolve(run_flags);
      pipeline::run_pipeline(cfg, pipeline::parse_stage(from), pipeline::parse_stage(to));
      std::cerr << "manifest: " << (cfg.out_dir / "manifest.json").string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  }
  return 0;
}
