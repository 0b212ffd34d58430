#include "hazardsim/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "json.hpp"

#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"
#include "hazardsim/gam.hpp"
#include "hazardsim/rng.hpp"

namespace hazardsim::synth {

SmoothShape parse_shape(const std::string& text) {
  if (text == "sine") return SmoothShape::kSine;
  if (text == "flat") return SmoothShape::kFlat;
  if (text == "step") return SmoothShape::kStep;
  throw ValidationError("unknown smooth shape '" + text + "' (sine|flat|step)");
}

std::vector<double> smooth_truth(SmoothShape shape, std::size_t n_classes, double amplitude) {
  std::vector<double> f(n_classes, 0.0);
  for (std::size_t k = 0; k < n_classes; ++k) {
    const double x = (static_cast<double>(k) + 0.5) / static_cast<double>(n_classes);
    switch (shape) {
      case SmoothShape::kSine: f[k] = amplitude * std::sin(2.0 * std::numbers::pi * x); break;
      case SmoothShape::kFlat: f[k] = 0.0; break;
      case SmoothShape::kStep: f[k] = (k % 2 == 0 ? amplitude : -amplitude); break;
    }
  }
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(n_classes);
  for (double& v : f) v -= mean;
  return f;
}

namespace {

std::vector<double> standardize(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mean) / sd;
  return z;
}

std::vector<double> shaking(const std::vector<double>& x, const std::vector<double>& y, double ex, double ey,
                            double amplitude, double decay_km, std::mt19937_64& engine) {
  std::normal_distribution<double> noise(0.0, 0.2);
  std::vector<double> pga(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::hypot(x[i] - ex, y[i] - ey);
    pga[i] = amplitude * std::exp(-d / decay_km) * std::exp(noise(engine));
  }
  return pga;
}

}  // namespace

SynthData generate(const SynthOptions& o) {
  if (o.n_units < 10) throw ValidationError("synthetic data needs at least 10 units");
  if (o.coefficients.size() != 1 + kLinearCovariates.size()) {
    throw ValidationError("synthetic coefficients: expected intercept + " + std::to_string(kLinearCovariates.size()) +
                          " effects");
  }
  if (o.smooth_classes < 3) throw ValidationError("smooth_classes must be at least 3");
  const std::size_t n = o.n_units;
  auto engine = rng::make_engine(o.seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthData data;
  data.x_km.resize(n);
  data.y_km.resize(n);
  std::vector<double> area(n), vrm_mean(n), vrm_sd(n), slope_sd(n), soil(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.x_km[i] = 100.0 * unit(engine);
    data.y_km[i] = 60.0 * unit(engine);
    area[i] = std::exp(11.5 + 0.7 * normal(engine));             // m^2
    vrm_mean[i] = 0.002 + 0.02 * unit(engine) * unit(engine);     // unitless ruggedness
    vrm_sd[i] = 0.5 * vrm_mean[i] + 0.004 * unit(engine);
    slope_sd[i] = 1.0 + 11.0 * unit(engine);                      // degrees
    soil[i] = 2.0 * unit(engine);                                 // m
  }
  auto train_engine = rng::make_engine(o.seed, 1);
  const std::vector<double> pga = shaking(data.x_km, data.y_km, 45.0, 30.0, 0.9, 35.0, train_engine);

  const std::vector<std::vector<double>> linear = {standardize(area), standardize(vrm_mean), standardize(vrm_sd),
                                                   standardize(pga)};
  data.slope_effect = smooth_truth(o.shape, o.smooth_classes, o.smooth_amplitude);
  const BinDefinition slope_bins = make_bins(slope_sd, o.smooth_classes, "slope_sd");
  // Soil depth: positive effect for mid-depth soils.
  const BinDefinition soil_bins = make_bins(soil, o.smooth_classes, "soil_depth");
  std::vector<double> soil_effect(o.smooth_classes);
  double soil_mean = 0.0;
  for (std::size_t k = 0; k < o.smooth_classes; ++k) {
    const double mid = soil_bins.midpoint(k);
    soil_effect[k] = 0.6 * o.smooth_amplitude * std::exp(-std::pow((mid - 0.7) / 0.3, 2.0));
    soil_mean += soil_effect[k];
  }
  for (double& v : soil_effect) v -= soil_mean / static_cast<double>(o.smooth_classes);

  std::vector<int> labels(n);
  data.true_probability.resize(n);
  auto label_engine = rng::make_engine(o.seed, 2);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = o.coefficients[0];
    for (std::size_t j = 0; j < linear.size(); ++j) eta += o.coefficients[j + 1] * linear[j][i];
    eta += data.slope_effect[slope_bins.class_index(slope_sd[i])];
    eta += soil_effect[soil_bins.class_index(soil[i])];
    data.true_probability[i] = gam::inverse_logit(eta);
    labels[i] = unit(label_engine) < data.true_probability[i] ? 1 : 0;
  }
  // Guarantee both classes on tiny samples.
  labels[0] = 1;
  labels[1] = 0;

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "SU" + std::to_string(i + 1);
  std::vector<std::string> names = {"su_area", "vrm_mean", "vrm_sd", "pga", "slope_sd", "soil_depth"};
  std::vector<std::vector<double>> columns = {area, vrm_mean, vrm_sd, pga, slope_sd, soil};
  auto noise_engine = rng::make_engine(o.seed, 3);
  for (std::size_t k = 0; k < o.n_noise; ++k) {
    names.push_back("noise_" + std::to_string(k + 1));
    std::vector<double> col(n);
    for (double& v : col) v = normal(noise_engine);
    columns.push_back(std::move(col));
  }
  data.table = SlopeUnitTable::create(ids, std::move(labels), std::move(names), std::move(columns));

  data.scenarios.unit_ids = ids;
  for (std::size_t s = 0; s < o.n_scenarios; ++s) {
    auto se = rng::make_engine(o.seed, 1000 + s);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double ex = -20.0 + 140.0 * u(se);
    const double ey = -20.0 + 100.0 * u(se);
    const double amp = 0.2 + 1.0 * u(se);
    const double decay = 10.0 + 40.0 * u(se);
    char id[32];
    std::snprintf(id, sizeof id, "S%03zu", s + 1);
    data.scenarios.ids.emplace_back(id);
    data.scenarios.pga.push_back(shaking(data.x_km, data.y_km, ex, ey, amp, decay, se));
  }
  return data;
}

void write(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SlopeUnitTable& t = data.table;
  {
    csv::Writer w(dir / "data.csv");
    w.field("unit_id").field("label");
    for (const auto& name : t.column_names()) w.field(name);
    w.end_row();
    for (std::size_t i = 0; i < t.n_units(); ++i) {
      w.field(t.unit_ids()[i]).field(t.labels()[i]);
      for (const auto& name : t.column_names()) w.field(t.column(name)[i]);
      w.end_row();
    }
  }
  {
    csv::Writer w(dir / "scenarios.csv");
    w.row({"scenario_id", "unit_id", "pga"});
    for (std::size_t s = 0; s < data.scenarios.size(); ++s) {
      for (std::size_t i = 0; i < t.n_units(); ++i) {
        w.field(data.scenarios.ids[s]).field(t.unit_ids()[i]).field(data.scenarios.pga[s][i]);
        w.end_row();
      }
    }
  }
  {
    nlohmann::ordered_json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = nlohmann::ordered_json::array();
    const double h = 0.4;  // half side, km
    for (std::size_t i = 0; i < t.n_units(); ++i) {
      const double x = data.x_km[i];
      const double y = data.y_km[i];
      nlohmann::ordered_json f;
      f["type"] = "Feature";
      f["properties"] = {{"unit_id", t.unit_ids()[i]}};
      f["geometry"] = {{"type", "Polygon"},
                       {"coordinates", {{{x - h, y - h}, {x + h, y - h}, {x + h, y + h}, {x - h, y + h}, {x - h, y - h}}}}};
      fc["features"].push_back(std::move(f));
    }
    std::ofstream out(dir / "units.geojson");
    if (!out) throw IoError("cannot write " + (dir / "units.geojson").string());
    out << fc.dump() << "\n";
  }
  {
    std::ofstream out(dir / "config.txt");
    if (!out) throw IoError("cannot write " + (dir / "config.txt").string());
    out << "# synthetic slope-unit dataset\n"
        << "input = data.csv\n"
        << "geojson = units.geojson\n"
        << "scenarios = scenarios.csv\n"
        << "out_dir = out\n"
        << "label_col = label\n"
        << "id_col = unit_id\n"
        << "covariate_cols = ";
    for (std::size_t c = 0; c < t.column_names().size(); ++c) out << (c ? "," : "") << t.column_names()[c];
    out << "\n"
        << "trigger_col = pga\n"
        << "smooths = slope_sd,soil_depth\n"
        << "bins = 20\n"
        << "seed = 1\n"
        << "draws = 1000\n";
  }
}

}  // namespace hazardsim::synth
