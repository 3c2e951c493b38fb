#pragma once

// Minimal CSV helpers for score lists, feature tables and metric reports.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dgssa/error.hpp"
#include "dgssa/metrics.hpp"

namespace dgssa::io {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, path.string() + ": cannot open");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

/// Reads one numeric column. With `column` set, the first row must be a header
/// naming it; otherwise the last field of every row is used and a non-numeric
/// first row is treated as a header. Rows whose first field is MEAN are skipped.
inline std::vector<double> read_score_column(const std::filesystem::path& path,
                                             const std::optional<std::string>& column = std::nullopt) {
  const auto rows = read_csv(path);
  std::vector<double> out;
  if (rows.empty()) return out;
  std::size_t start = 0;
  std::optional<std::size_t> col;
  if (column) {
    const auto& header = rows.front();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == *column) col = i;
    }
    if (!col) throw Error(Errc::Format, path.string() + ": no column named '" + *column + "'");
    start = 1;
  } else if (!parse_number(rows.front().back())) {
    start = 1;
  }
  for (std::size_t r = start; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!row.empty() && row.front() == "MEAN") continue;
    const std::size_t c = col ? *col : row.size() - 1;
    if (c >= row.size()) throw Error(Errc::Format, path.string() + ": short row " + std::to_string(r + 1));
    const auto v = parse_number(row[c]);
    if (!v) throw Error(Errc::Format, path.string() + ": non-numeric value '" + row[c] + "' on row " + std::to_string(r + 1));
    out.push_back(*v);
  }
  return out;
}

/// `domain,f0,f1,...` rows with an optional header.
inline metrics::FeatureTable read_feature_table(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  metrics::FeatureTable table;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2) throw Error(Errc::Format, path.string() + ": row " + std::to_string(r + 1) + " has no features");
    std::vector<double> f;
    bool numeric = true;
    for (std::size_t i = 1; i < row.size(); ++i) {
      const auto v = parse_number(row[i]);
      if (!v) {
        numeric = false;
        break;
      }
      f.push_back(*v);
    }
    if (!numeric) {
      if (r == 0) continue;  // header
      throw Error(Errc::Format, path.string() + ": non-numeric feature on row " + std::to_string(r + 1));
    }
    table.add(row[0], std::move(f));
  }
  return table;
}

/// Fixed six-decimal rendering; "NA" for undefined values.
inline std::string format_metric(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

}  // namespace dgssa::io
