#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace hazardsim::csv {

struct Document {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or npos.
  std::size_t find(std::string_view name) const;
};

/// Reads a delimited text file with a mandatory header row. Double-quoted
/// fields may contain the delimiter and escaped quotes ("").
Document read(const std::filesystem::path& path, char delimiter = ',');
Document parse(std::string_view text, char delimiter = ',');

/// Shortest form that round-trips is not guaranteed by printf; 17 significant
/// digits is.
std::string format_double(double value);

double parse_double(std::string_view field);

/// Line-oriented writer; throws IoError if the file cannot be opened.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);

  Writer& field(std::string_view text);
  Writer& field(double value);
  Writer& field(long long value);
  Writer& field(std::size_t value) { return field(static_cast<long long>(value)); }
  Writer& field(int value) { return field(static_cast<long long>(value)); }
  void end_row();

  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  bool first_in_row_ = true;
  std::filesystem::path path_;
};

}  // namespace hazardsim::csv
