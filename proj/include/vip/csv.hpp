#ifndef VIP_CSV_HPP
#define VIP_CSV_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "vip/error.hpp"

namespace vip {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw Error(ErrorKind::Io, "not a number: '" + s + "'");
  return v;
}

/// Numeric table; an empty optional is written as an empty field.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;

  void add(std::vector<std::optional<double>> row) {
    if (row.size() != header.size()) throw Error(ErrorKind::DimensionMismatch, "row width differs from header");
    rows.push_back(std::move(row));
  }

  bool operator==(const CsvTable& o) const {
    if (header != o.header || rows.size() != o.rows.size()) return false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        const auto &a = rows[r][c], &b = o.rows[r][c];
        if (a.has_value() != b.has_value()) return false;
        if (a && !(*a == *b || (std::isnan(*a) && std::isnan(*b)))) return false;
      }
    }
    return true;
  }
};

inline void emit_csv(std::ostream& os, const CsvTable& t) {
  for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      if (row[c]) os << format_double(*row[c]);
    }
    os << '\n';
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable parse_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_csv_line(line);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                     " fields, got " + std::to_string(cells.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(c.empty() ? std::nullopt : std::optional<double>(parse_double(c)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string to_csv_string(const CsvTable& t) {
  std::ostringstream os;
  emit_csv(os, t);
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  os << text;
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse_csv(is);
}

}  // namespace vip

#endif
