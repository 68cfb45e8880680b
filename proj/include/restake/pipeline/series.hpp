#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/io.hpp"

namespace restake::pipeline {

/// One named daily series. Dates are unique by construction of the map.
struct RawSeries {
  std::string series_name;
  std::map<Date, double> points;
  std::string units;
  std::string retrieved_at;

  bool operator==(const RawSeries&) const = default;

  /// Inserts a point, rejecting duplicates and non-finite values.
  void add(Date d, double v) {
    if (!std::isfinite(v))
      throw DataError("series '" + series_name + "': non-finite value on " + d.iso());
    if (!points.emplace(d, v).second)
      throw DataError("series '" + series_name + "': duplicate date " + d.iso());
  }

  void validate() const {
    for (const auto& [d, v] : points)
      if (!std::isfinite(v))
        throw DataError("series '" + series_name + "': non-finite value on " + d.iso());
  }
};

inline nlohmann::json to_json(const RawSeries& s) {
  nlohmann::json out;
  out["series_name"] = s.series_name;
  out["units"] = s.units;
  out["retrieved_at"] = s.retrieved_at;
  out["points"] = nlohmann::json::array();
  for (const auto& [d, v] : s.points) out["points"].push_back({d.iso(), v});
  return out;
}

inline RawSeries raw_series_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("series document must be an object");
  RawSeries s;
  try {
    s.series_name = j.at("series_name").get<std::string>();
    s.units = j.value("units", "");
    s.retrieved_at = j.value("retrieved_at", "");
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2 || !p[1].is_number())
        throw DataError("series '" + s.series_name + "': points must be [date, number] pairs");
      s.add(Date::parse(p[0].get<std::string>()), p[1].get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed series document: ") + e.what());
  }
  return s;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  for (auto& cell : cells) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '"')) cell.erase(0, 1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '"')) cell.pop_back();
  }
  return cells;
}

inline std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

/// Parses a wide CSV (header row, ISO date first, one column per series) into
/// one RawSeries per column. Empty cells are absent points.
inline std::vector<RawSeries> read_panel_csv(const std::string& text, const std::string& origin = "csv") {
  const auto lines = detail::csv_lines(text);
  if (lines.empty()) throw DataError(origin + ": empty CSV");
  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() < 2) throw DataError(origin + ": CSV needs a date column and at least one series");
  std::set<std::string> seen;
  std::vector<RawSeries> out(header.size() - 1);
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty() || !seen.insert(header[c]).second)
      throw DataError(origin + ": duplicate or empty column name '" + header[c] + "'");
    out[c - 1].series_name = header[c];
  }
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split_csv_line(lines[r]);
    const std::string where = origin + " line " + std::to_string(r + 1);
    if (cells.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    const Date d = Date::parse(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      out[c - 1].add(d, parse_double(cells[c], where + " column " + header[c]));
    }
  }
  return out;
}

inline std::vector<RawSeries> load_panel_csv(const std::filesystem::path& path) {
  return read_panel_csv(read_file(path), path.string());
}

/// Two-column CSV `date,<series_name>`.
inline std::string to_csv(const RawSeries& s) {
  std::string out = "date," + s.series_name + "\n";
  for (const auto& [d, v] : s.points) out += d.iso() + "," + format_double(v) + "\n";
  return out;
}

/// Reads `column` (or the only value column) of a CSV as a series.
inline RawSeries raw_series_from_csv(const std::string& text, const std::string& column = {},
                                     const std::string& origin = "csv") {
  auto all = read_panel_csv(text, origin);
  if (column.empty()) {
    if (all.size() != 1)
      throw DataError(origin + ": CSV has " + std::to_string(all.size()) +
                      " value columns; name the one to read");
    return std::move(all.front());
  }
  for (auto& s : all)
    if (s.series_name == column) return std::move(s);
  throw DataError(origin + ": no column '" + column + "'");
}

}  // namespace restake::pipeline
