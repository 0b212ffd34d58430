#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hazardsim/core_data.hpp"
#include "hazardsim/scenario.hpp"

namespace hazardsim::synth {

enum class SmoothShape { kSine, kFlat, kStep };

SmoothShape parse_shape(const std::string& text);

struct SynthOptions {
  std::size_t n_units = 4000;
  std::size_t n_noise = 2;  // extra covariates with no effect
  /// Intercept, then effects of su_area, vrm_mean, vrm_sd, pga on the
  /// standardized scale.
  std::vector<double> coefficients = {-1.5, 0.4, 0.5, 0.3, 1.2};
  SmoothShape shape = SmoothShape::kSine;
  double smooth_amplitude = 1.0;
  std::size_t smooth_classes = kDefaultBins;
  std::size_t n_scenarios = 20;
  std::uint64_t seed = 1;
};

/// Linear covariates in generation order (matching SynthOptions::coefficients).
inline const std::vector<std::string> kLinearCovariates = {"su_area", "vrm_mean", "vrm_sd", "pga"};
/// Covariates carrying a nonlinear effect: slope_sd (shape), soil_depth (bump).
inline const std::vector<std::string> kSmoothCovariates = {"slope_sd", "soil_depth"};

struct SynthData {
  SlopeUnitTable table;
  scenario::ScenarioSet scenarios;
  std::vector<double> true_probability;  // generating susceptibility per unit
  std::vector<double> x_km;              // unit centroids
  std::vector<double> y_km;
  std::vector<double> slope_effect;      // true class effects of slope_sd (sum zero)
};

/// Slope units scattered over a 100 x 60 km box with plausible covariates in
/// native units, a training shaking field from a fixed epicenter, and
/// scenario shaking fields from random epicenters.
SynthData generate(const SynthOptions& options);

/// Class effects of the slope_sd smooth for a given shape (sum zero).
std::vector<double> smooth_truth(SmoothShape shape, std::size_t n_classes, double amplitude);

/// Writes data.csv, scenarios.csv, units.geojson and config.txt into `dir`.
void write(const SynthData& data, const std::filesystem::path& dir);

}  // namespace hazardsim::synth
