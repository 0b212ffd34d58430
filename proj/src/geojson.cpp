#include "hazardsim/geojson.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "hazardsim/csv.hpp"
#include "hazardsim/error.hpp"

namespace hazardsim {

namespace {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json field_value(const std::string& text) {
  if (text.empty()) return nullptr;
  try {
    const double v = csv::parse_double(text);
    if (std::isfinite(v)) return v;
  } catch (const ValidationError&) {
  }
  return text;
}

std::string feature_key(const Json& feature, const std::string& id_col) {
  if (feature.contains("properties") && feature["properties"].is_object() && feature["properties"].contains(id_col)) {
    const Json& v = feature["properties"][id_col];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return v.dump();
  }
  if (feature.contains("id")) {
    const Json& v = feature["id"];
    return v.is_string() ? v.get<std::string>() : v.dump();
  }
  return {};
}

}  // namespace

std::string join_geojson_text(const std::string& summary_csv_text, const std::string& geojson_text,
                              const std::string& id_col, JoinReport* report) {
  const csv::Document summary = csv::parse(summary_csv_text);
  const std::size_t id_idx = summary.find(id_col);
  if (id_idx == std::string::npos) throw ValidationError("summary CSV has no '" + id_col + "' column");
  std::unordered_map<std::string, std::size_t> rows;
  for (std::size_t r = 0; r < summary.rows.size(); ++r) rows.emplace(summary.rows[r][id_idx], r);

  Json root;
  try {
    root = Json::parse(geojson_text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed GeoJSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("type") || root["type"] != "FeatureCollection") {
    throw ValidationError("GeoJSON root must be a FeatureCollection");
  }
  if (!root.contains("features") || !root["features"].is_array()) {
    throw ValidationError("FeatureCollection has no features array");
  }

  JoinReport rep;
  for (Json& feature : root["features"]) {
    if (!feature.is_object()) throw ValidationError("GeoJSON feature is not an object");
    ++rep.features;
    if (!feature.contains("properties") || feature["properties"].is_null()) feature["properties"] = Json::object();
    Json& props = feature["properties"];
    auto it = rows.find(feature_key(feature, id_col));
    if (it != rows.end()) ++rep.matched;
    for (std::size_t c = 0; c < summary.header.size(); ++c) {
      if (c == id_idx) continue;
      props[summary.header[c]] = it == rows.end() ? Json(nullptr) : field_value(summary.rows[it->second][c]);
    }
  }
  rep.unmatched = rep.features - rep.matched;
  if (rep.matched == 0) throw ValidationError("no GeoJSON feature matches any summary row");
  if (report) *report = rep;
  return root.dump(1) + "\n";
}

JoinReport join_geojson(const std::filesystem::path& summary_csv, const std::filesystem::path& geojson_in,
                        const std::filesystem::path& geojson_out, const std::string& id_col) {
  JoinReport rep;
  const std::string text = join_geojson_text(read_text(summary_csv), read_text(geojson_in), id_col, &rep);
  std::ofstream out(geojson_out, std::ios::binary);
  if (!out) throw IoError("cannot write " + geojson_out.string());
  out << text;
  if (!out) throw IoError("write failed: " + geojson_out.string());
  return rep;
}

}  // namespace hazardsim
