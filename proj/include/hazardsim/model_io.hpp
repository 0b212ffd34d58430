#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hazardsim/core_data.hpp"
#include "hazardsim/gam.hpp"

namespace hazardsim {

/// A fitted model plus the units it was fitted on, so that scenario
/// simulation needs nothing but this file and the scenario PGA tables.
struct StoredModel {
  gam::GamModel model;
  SlopeUnitTable units;
  std::string trigger;
};

// model.bin layout, little-endian throughout:
//   "HZGAM01" (7 bytes), u32 format version
//   spec:      fixed names, fixed/intercept precision, grid, smooths (name, breaks)
//   scaler:    columns, means, sds
//   posterior: mode, basis T (p x q), lower factor L (q x q), smooth
//              log-precisions, grid points, log marginals, column map
//   units:     ids, labels, column names, columns
//   trigger name
// Strings are u64 length + bytes; vectors are u64 count + elements; matrices
// are u64 rows, u64 cols + column-major doubles.
inline constexpr char kModelMagic[] = "HZGAM01";
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const StoredModel& stored);

/// Throws IoError if unreadable, ValidationError on a bad magic, version or
/// truncated file.
StoredModel load_model(const std::filesystem::path& path);

}  // namespace hazardsim
