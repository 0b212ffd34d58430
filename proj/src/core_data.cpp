#include "hazardsim/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"

namespace hazardsim {

SlopeUnitTable SlopeUnitTable::create(std::vector<std::string> unit_ids, std::vector<int> labels,
                                      std::vector<std::string> column_names,
                                      std::vector<std::vector<double>> columns) {
  const std::size_t n = unit_ids.size();
  if (n == 0) throw ValidationError("table has no rows");
  if (labels.size() != n) throw ValidationError("label column length differs from unit ids");
  if (column_names.size() != columns.size()) {
    throw ValidationError("column name count differs from column count");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.insert(unit_ids[i]).second) {
      throw ValidationError("duplicate unit_id '" + unit_ids[i] + "' at row " + std::to_string(i + 1));
    }
  }
  bool has0 = false;
  bool has1 = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("row " + std::to_string(i + 1) + ": label must be 0 or 1, got " +
                            std::to_string(labels[i]));
    }
    (labels[i] ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw ValidationError("labels must contain both 0 and 1");
  std::unordered_set<std::string> names;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (!names.insert(column_names[c]).second) {
      throw ValidationError("duplicate column '" + column_names[c] + "'");
    }
    if (columns[c].size() != n) {
      throw ValidationError("column '" + column_names[c] + "' has wrong length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(columns[c][i])) {
        throw ValidationError("missing value at row " + std::to_string(i + 1) + ", column '" +
                              column_names[c] + "'");
      }
    }
  }
  SlopeUnitTable t;
  t.unit_ids_ = std::move(unit_ids);
  t.labels_ = std::move(labels);
  t.column_names_ = std::move(column_names);
  t.columns_ = std::move(columns);
  return t;
}

bool SlopeUnitTable::has_column(std::string_view name) const noexcept {
  return std::find(column_names_.begin(), column_names_.end(), name) != column_names_.end();
}

std::span<const double> SlopeUnitTable::column(std::string_view name) const {
  auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) throw ValidationError("missing column '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - column_names_.begin())];
}

SlopeUnitTable SlopeUnitTable::subset(std::span<const std::size_t> rows) const {
  SlopeUnitTable t;
  t.column_names_ = column_names_;
  t.columns_.resize(columns_.size());
  t.unit_ids_.reserve(rows.size());
  t.labels_.reserve(rows.size());
  for (auto& c : t.columns_) c.reserve(rows.size());
  for (std::size_t r : rows) {
    t.unit_ids_.push_back(unit_ids_.at(r));
    t.labels_.push_back(labels_[r]);
    for (std::size_t c = 0; c < columns_.size(); ++c) t.columns_[c].push_back(columns_[c][r]);
  }
  return t;
}

SlopeUnitTable SlopeUnitTable::with_column(std::string_view name, std::vector<double> values) const {
  if (values.size() != n_units()) throw ValidationError("replacement column has wrong length");
  SlopeUnitTable t = *this;
  auto it = std::find(t.column_names_.begin(), t.column_names_.end(), name);
  if (it == t.column_names_.end()) {
    t.column_names_.emplace_back(name);
    t.columns_.push_back(std::move(values));
  } else {
    t.columns_[static_cast<std::size_t>(it - t.column_names_.begin())] = std::move(values);
  }
  return t;
}

std::size_t Scaler::index_of(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("scaler has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t StandardizedDesign::n_extrapolated() const {
  return static_cast<std::size_t>(std::count(extrapolated.begin(), extrapolated.end(), true));
}

std::size_t StandardizedDesign::column_index(std::string_view name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw ValidationError("design has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

std::size_t BinDefinition::class_index(double value, bool* clamped) const {
  const std::size_t k = n_classes();
  if (clamped) *clamped = false;
  if (value < breaks.front()) {
    if (clamped) *clamped = true;
    return 0;
  }
  if (value >= breaks.back()) {
    if (value > breaks.back() && clamped) *clamped = true;
    return k - 1;
  }
  auto it = std::upper_bound(breaks.begin(), breaks.end(), value);
  return static_cast<std::size_t>(it - breaks.begin()) - 1;
}

namespace {

SlopeUnitTable table_from_columns(const std::vector<std::string>& ids,
                                  const std::vector<std::string>& label_text,
                                  const TableSchema& schema,
                                  std::vector<std::vector<double>> covariates) {
  std::vector<int> labels(label_text.size());
  for (std::size_t i = 0; i < label_text.size(); ++i) {
    const std::string& s = label_text[i];
    if (s == "0") {
      labels[i] = 0;
    } else if (s == "1") {
      labels[i] = 1;
    } else {
      throw ValidationError("row " + std::to_string(i + 1) + ": label must be 0 or 1, got '" + s + "'");
    }
  }
  return SlopeUnitTable::create(ids, std::move(labels), schema.covariate_cols, std::move(covariates));
}

void check_schema(const TableSchema& schema) {
  if (schema.label_col.empty() || schema.id_col.empty()) {
    throw ValidationError("schema must name a label column and a unit-id column");
  }
  if (schema.covariate_cols.empty()) throw ValidationError("schema must name at least one covariate column");
}

}  // namespace

SlopeUnitTable load_table(const std::filesystem::path& path, const TableSchema& schema) {
  check_schema(schema);
  if (!std::filesystem::exists(path)) throw IoError("input not found: " + path.string());
  const csv::Document doc = csv::read(path, schema.delimiter);
  auto require = [&](const std::string& name) {
    const std::size_t idx = doc.find(name);
    if (idx == std::string::npos) throw ValidationError("schema error: missing column '" + name + "'");
    return idx;
  };
  const std::size_t id_idx = require(schema.id_col);
  const std::size_t label_idx = require(schema.label_col);
  std::vector<std::size_t> cov_idx;
  for (const auto& c : schema.covariate_cols) cov_idx.push_back(require(c));

  const std::size_t n = doc.rows.size();
  std::vector<std::string> ids(n);
  std::vector<std::string> labels(n);
  std::vector<std::vector<double>> cols(cov_idx.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = doc.rows[i];
    ids[i] = row[id_idx];
    labels[i] = row[label_idx];
    for (std::size_t c = 0; c < cov_idx.size(); ++c) {
      const std::string& f = row[cov_idx[c]];
      if (f.empty() || f == "NA" || f == "nan" || f == "NaN") {
        throw ValidationError("missing value at row " + std::to_string(i + 1) + ", column '" +
                              schema.covariate_cols[c] + "'");
      }
      try {
        cols[c][i] = csv::parse_double(f);
      } catch (const ValidationError& e) {
        throw ValidationError("row " + std::to_string(i + 1) + ", column '" + schema.covariate_cols[c] +
                              "': " + e.what());
      }
    }
  }
  return table_from_columns(ids, labels, schema, std::move(cols));
}

SlopeUnitTable load_table_geojson(const std::filesystem::path& path, const TableSchema& schema) {
  check_schema(schema);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed GeoJSON: " + std::string(e.what()));
  }
  if (!root.is_object() || root.value("type", "") != "FeatureCollection" || !root.contains("features") ||
      !root["features"].is_array()) {
    throw ValidationError("GeoJSON root must be a FeatureCollection");
  }
  const auto& features = root["features"];
  const std::size_t n = features.size();
  std::vector<std::string> ids(n);
  std::vector<std::string> labels(n);
  std::vector<std::vector<double>> cols(schema.covariate_cols.size(), std::vector<double>(n));
  auto as_text = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 1e15) return std::to_string(static_cast<long long>(d));
      return csv::format_double(d);
    }
    return v.dump();
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& props = features[i].value("properties", nlohmann::json::object());
    auto get = [&](const std::string& name) -> const nlohmann::json& {
      if (!props.contains(name)) throw ValidationError("schema error: feature " + std::to_string(i + 1) +
                                                       " lacks property '" + name + "'");
      return props.at(name);
    };
    ids[i] = as_text(get(schema.id_col));
    labels[i] = as_text(get(schema.label_col));
    for (std::size_t c = 0; c < schema.covariate_cols.size(); ++c) {
      const auto& v = get(schema.covariate_cols[c]);
      if (!v.is_number()) {
        throw ValidationError("missing value at row " + std::to_string(i + 1) + ", column '" +
                              schema.covariate_cols[c] + "'");
      }
      cols[c][i] = v.get<double>();
    }
  }
  return table_from_columns(ids, labels, schema, std::move(cols));
}

Scaler fit_scaler(const SlopeUnitTable& table, std::span<const std::string> columns) {
  Scaler s;
  for (const auto& name : columns) {
    auto values = table.column(name);
    const std::size_t n = values.size();
    if (n < 2) throw ValidationError("column '" + name + "' needs at least two values to scale");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi || !(sd > 0.0)) {
      throw ValidationError("degenerate variance: column '" + name + "' is constant");
    }
    s.columns.push_back(name);
    s.means.push_back(mean);
    s.sds.push_back(sd);
  }
  return s;
}

StandardizedDesign apply_scaler(const Scaler& scaler, const SlopeUnitTable& table) {
  StandardizedDesign d;
  const std::size_t n = table.n_units();
  const std::size_t m = scaler.columns.size();
  d.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  d.extrapolated.assign(n, false);
  for (std::size_t j = 0; j < m; ++j) {
    auto values = table.column(scaler.columns[j]);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scaler.transform(j, values[i]);
      d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z;
      if (std::abs(z) > kExtrapolationZ) d.extrapolated[i] = true;
    }
  }
  d.column_names = scaler.columns;
  d.scaler = scaler;
  return d;
}

Eigen::MatrixXd unstandardize(const StandardizedDesign& design) {
  Eigen::MatrixXd raw = design.matrix;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const auto js = static_cast<std::size_t>(j);
    raw.col(j) = raw.col(j).array() * design.scaler.sds[js] + design.scaler.means[js];
  }
  return raw;
}

Binning parse_binning(std::string_view text) {
  if (text == "equal") return Binning::kEqualWidth;
  if (text == "quantile") return Binning::kQuantile;
  throw ValidationError("unknown binning '" + std::string(text) + "' (equal|quantile)");
}

std::string to_string(Binning binning) { return binning == Binning::kQuantile ? "quantile" : "equal"; }

BinDefinition make_bins(std::span<const double> values, std::size_t n_classes, std::string covariate,
                        Binning binning) {
  if (n_classes < 3) throw ValidationError("smooth needs at least 3 classes, got " + std::to_string(n_classes));
  if (values.empty()) throw ValidationError("cannot bin an empty covariate");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw ValidationError("cannot bin constant covariate '" + covariate + "'");
  BinDefinition b;
  b.covariate = std::move(covariate);
  b.breaks.resize(n_classes + 1);
  if (binning == Binning::kQuantile) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double last = static_cast<double>(sorted.size() - 1);
    for (std::size_t k = 0; k <= n_classes; ++k) {
      const double rank = last * static_cast<double>(k) / static_cast<double>(n_classes);
      const auto i = static_cast<std::size_t>(std::floor(rank));
      const double frac = rank - static_cast<double>(i);
      b.breaks[k] = i + 1 < sorted.size() ? sorted[i] + frac * (sorted[i + 1] - sorted[i]) : sorted[i];
    }
  } else {
    const double width = (hi - lo) / static_cast<double>(n_classes);
    for (std::size_t k = 0; k <= n_classes; ++k) b.breaks[k] = lo + width * static_cast<double>(k);
  }
  b.breaks.front() = lo;
  b.breaks.back() = hi;
  for (std::size_t k = 1; k <= n_classes; ++k) {
    if (!(b.breaks[k] > b.breaks[k - 1])) {
      throw ValidationError(binning == Binning::kQuantile
                                ? "too many tied values in '" + b.covariate + "' for " + std::to_string(n_classes) +
                                      " quantile classes"
                                : "covariate range too narrow for " + std::to_string(n_classes) + " classes");
    }
  }
  return b;
}

}  // namespace hazardsim
