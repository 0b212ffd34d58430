#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

namespace hazardsim {

struct JoinReport {
  std::size_t features = 0;
  std::size_t matched = 0;
  std::size_t unmatched = 0;  // features given null-valued summary properties
};

/// Merges every column of `summary_csv` (keyed by `id_col`) into the
/// properties of the matching features of `geojson_in` and writes
/// `geojson_out`. Geometry and existing properties are copied unchanged.
/// Throws ValidationError for malformed GeoJSON, a non-FeatureCollection root,
/// or when no feature matches any summary row.
JoinReport join_geojson(const std::filesystem::path& summary_csv, const std::filesystem::path& geojson_in,
                        const std::filesystem::path& geojson_out, const std::string& id_col = "unit_id");

/// In-memory form used by join_geojson; both arguments are document text.
std::string join_geojson_text(const std::string& summary_csv_text, const std::string& geojson_text,
                              const std::string& id_col, JoinReport* report = nullptr);

}  // namespace hazardsim
