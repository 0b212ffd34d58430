#include "hazardsim/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "hazardsim/error.hpp"

namespace hazardsim::csv {

std::size_t Document::find(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::string::npos;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == delimiter) {
      fields.push_back(was_quoted ? current : trim(current));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field in line: " + std::string(line));
  fields.push_back(was_quoted ? current : trim(current));
  return fields;
}

}  // namespace

Document parse(std::string_view text, char delimiter) {
  Document doc;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  // Strip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto fields = split_line(line, delimiter);
    if (!have_header) {
      doc.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != doc.header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(doc.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    doc.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ValidationError("empty CSV: header row required");
  return doc;
}

Document read(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), delimiter);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view field) {
  const auto first = field.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) throw ValidationError("empty numeric field");
  const auto last = field.find_last_not_of(" \t\r");
  std::string s(field.substr(first, last - first + 1));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw ValidationError("not a number: '" + s + "'");
  }
  return v;
}

Writer::Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw IoError("cannot write " + path.string());
}

Writer& Writer::field(std::string_view text) {
  if (!first_in_row_) out_ << ',';
  first_in_row_ = false;
  if (text.find_first_of(",\"\n") != std::string_view::npos) {
    out_ << '"';
    for (char c : text) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  } else {
    out_ << text;
  }
  return *this;
}

Writer& Writer::field(double value) { return field(std::string_view(format_double(value))); }

Writer& Writer::field(long long value) { return field(std::string_view(std::to_string(value))); }

void Writer::end_row() {
  out_ << '\n';
  first_in_row_ = true;
  if (!out_) throw IoError("write failed: " + path_.string());
}

void Writer::row(const std::vector<std::string>& fields) {
  for (const auto& f : fields) field(std::string_view(f));
  end_row();
}

}  // namespace hazardsim::csv
