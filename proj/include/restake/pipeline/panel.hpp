#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/pipeline/series.hpp"

namespace restake::pipeline {

/// Strictly daily table of named series on [dates.front(), dates.back()].
/// Columns are keyed by name, so the input order of series never matters.
struct Panel {
  std::vector<Date> dates;
  std::map<std::string, std::vector<double>> columns;
  std::map<std::string, std::string> units;
  /// Forward-filled cells per column; only columns with fills appear.
  std::map<std::string, std::size_t> fill_counts;

  std::size_t rows() const noexcept { return dates.size(); }

  bool has(const std::string& name) const { return columns.contains(name); }

  const std::vector<double>& at(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) throw ValidationError("panel has no column '" + name + "'");
    return it->second;
  }

  /// Rows [begin, end).
  Panel slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) throw ValidationError("panel row range out of bounds");
    Panel out{{dates.begin() + static_cast<std::ptrdiff_t>(begin), dates.begin() + static_cast<std::ptrdiff_t>(end)},
              {}, units, fill_counts};
    for (const auto& [name, v] : columns)
      out.columns[name] = {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
    return out;
  }

  bool operator==(const Panel&) const = default;
};

struct AlignOptions {
  bool ffill = false;
};

namespace detail {

inline std::map<std::string, RawSeries> merge_by_name(const std::vector<RawSeries>& series) {
  std::map<std::string, RawSeries> merged;
  for (const auto& s : series) {
    auto [it, fresh] = merged.try_emplace(s.series_name, s);
    if (fresh) continue;
    for (const auto& [d, v] : s.points)
      if (!it->second.points.emplace(d, v).second)
        throw DataError("series '" + s.series_name + "' is given twice with overlapping date " + d.iso());
  }
  return merged;
}

}  // namespace detail

/// Reindexes every series onto each day of [start, end]. A missing day is an
/// error unless `ffill` is set, in which case the last earlier value is
/// carried forward and counted.
inline Panel align_daily(const std::vector<RawSeries>& series, Date start, Date end, AlignOptions opt = {}) {
  if (end < start) throw ValidationError("align_daily: end " + end.iso() + " precedes start " + start.iso());
  if (series.empty()) throw ValidationError("align_daily: no series given");
  Panel panel;
  for (Date d = start; d <= end; ++d) panel.dates.push_back(d);
  for (const auto& [name, s] : detail::merge_by_name(series)) {
    s.validate();
    std::vector<double> col(panel.rows());
    std::size_t fills = 0;
    auto prior = s.points.lower_bound(start);
    std::optional<double> last;
    if (prior != s.points.begin()) last = std::prev(prior)->second;
    for (std::size_t i = 0; i < panel.rows(); ++i) {
      const auto it = s.points.find(panel.dates[i]);
      if (it != s.points.end()) {
        last = it->second;
      } else if (opt.ffill && last) {
        ++fills;
      } else {
        throw DataError("series '" + name + "' has no value on " + panel.dates[i].iso() +
                        (opt.ffill ? " and nothing earlier to carry forward" : " (gap; pass --ffill to forward-fill)"));
      }
      col[i] = *last;
    }
    panel.columns[name] = std::move(col);
    panel.units[name] = s.units;
    if (fills > 0) panel.fill_counts[name] = fills;
  }
  return panel;
}

/// Largest window every series covers: latest first date to earliest last date.
inline std::pair<Date, Date> common_window(const std::vector<RawSeries>& series) {
  if (series.empty()) throw ValidationError("common_window: no series given");
  Date lo = Date(1, 1, 1);
  Date hi = Date(9999, 12, 31);
  for (const auto& s : series) {
    if (s.points.empty()) throw InsufficientDataError("series '" + s.series_name + "' is empty");
    lo = std::max(lo, s.points.begin()->first);
    hi = std::min(hi, s.points.rbegin()->first);
  }
  if (hi < lo) throw InsufficientDataError("series do not overlap");
  return {lo, hi};
}

inline Panel align_daily(const std::vector<RawSeries>& series, AlignOptions opt = {}) {
  const auto [lo, hi] = common_window(series);
  return align_daily(series, lo, hi, opt);
}

inline std::string to_csv(const Panel& p) {
  std::string out = "date";
  for (const auto& [name, _] : p.columns) out += "," + name;
  out += "\n";
  for (std::size_t i = 0; i < p.rows(); ++i) {
    out += p.dates[i].iso();
    for (const auto& [_, v] : p.columns) out += "," + format_double(v[i]);
    out += "\n";
  }
  return out;
}

}  // namespace restake::pipeline
