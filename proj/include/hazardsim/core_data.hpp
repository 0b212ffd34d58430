#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hazardsim {

/// Column roles of a slope-unit table.
struct TableSchema {
  std::string label_col = "label";
  std::string id_col = "unit_id";
  std::vector<std::string> covariate_cols;
  char delimiter = ',';
};

/// One row per slope unit: identifier, presence/absence label and raw
/// covariates in their native units. Immutable once built.
class SlopeUnitTable {
 public:
  /// Validates and takes ownership. Throws ValidationError on duplicate ids,
  /// labels outside {0,1}, a single-class label vector, ragged or non-finite
  /// columns.
  static SlopeUnitTable create(std::vector<std::string> unit_ids, std::vector<int> labels,
                               std::vector<std::string> column_names,
                               std::vector<std::vector<double>> columns);

  std::size_t n_units() const noexcept { return unit_ids_.size(); }
  const std::vector<std::string>& unit_ids() const noexcept { return unit_ids_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  bool has_column(std::string_view name) const noexcept;
  /// Throws ValidationError naming the column if it is absent.
  std::span<const double> column(std::string_view name) const;

  /// Rows at `rows` in the given order. Labels are not re-validated for
  /// class balance, so a subset may hold a single class.
  SlopeUnitTable subset(std::span<const std::size_t> rows) const;

  /// Copy with one column replaced (same length).
  SlopeUnitTable with_column(std::string_view name, std::vector<double> values) const;

 private:
  std::vector<std::string> unit_ids_;
  std::vector<int> labels_;
  std::vector<std::string> column_names_;
  std::vector<std::vector<double>> columns_;
};

/// Per-column training mean and sample standard deviation.
struct Scaler {
  std::vector<std::string> columns;
  std::vector<double> means;
  std::vector<double> sds;

  std::size_t index_of(std::string_view name) const;  // throws if absent
  double transform(std::size_t j, double raw) const { return (raw - means[j]) / sds[j]; }
  double inverse(std::size_t j, double z) const { return z * sds[j] + means[j]; }
};

/// |z| above which a standardized value counts as extrapolated.
inline constexpr double kExtrapolationZ = 6.0;

struct StandardizedDesign {
  Eigen::MatrixXd matrix;  // n_units x columns
  std::vector<std::string> column_names;
  Scaler scaler;
  /// Per-row flag: some column of that row has |z| > kExtrapolationZ.
  std::vector<bool> extrapolated;

  std::size_t n_extrapolated() const;
  std::size_t column_index(std::string_view name) const;  // throws if absent
};

/// Classes over a covariate's training range. Class indices are zero-based: class k covers [breaks[k], breaks[k+1]) and the last class is
/// closed on the right.
struct BinDefinition {
  std::string covariate;
  std::vector<double> breaks;  // K + 1 strictly increasing values

  std::size_t n_classes() const noexcept { return breaks.empty() ? 0 : breaks.size() - 1; }
  /// Values outside the training range are clamped to the edge class and
  /// `clamped` (if given) is set.
  std::size_t class_index(double value, bool* clamped = nullptr) const;
  double midpoint(std::size_t k) const { return 0.5 * (breaks[k] + breaks[k + 1]); }
};

inline constexpr std::size_t kDefaultBins = 20;

enum class Binning { kEqualWidth, kQuantile };
Binning parse_binning(std::string_view text);
std::string to_string(Binning binning);

SlopeUnitTable load_table(const std::filesystem::path& path, const TableSchema& schema);

/// FeatureCollection whose feature properties carry the schema columns.
SlopeUnitTable load_table_geojson(const std::filesystem::path& path, const TableSchema& schema);

/// Throws ValidationError for a constant column or a column of fewer than two
/// values.
Scaler fit_scaler(const SlopeUnitTable& table, std::span<const std::string> columns);

/// Uses the stored training moments; never refits.
StandardizedDesign apply_scaler(const Scaler& scaler, const SlopeUnitTable& table);

/// Inverse of apply_scaler on the design's own columns.
Eigen::MatrixXd unstandardize(const StandardizedDesign& design);

/// Equal-width classes over [min, max], or classes holding equal shares of
/// the training values (breaks at interpolated quantiles). Throws
/// ValidationError when the breaks would not be strictly increasing.
BinDefinition make_bins(std::span<const double> values, std::size_t n_classes,
                        std::string covariate = {}, Binning binning = Binning::kEqualWidth);

}  // namespace hazardsim
