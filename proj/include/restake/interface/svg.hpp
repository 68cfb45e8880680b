#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/io.hpp"

namespace restake::interface {

struct PlotSeries {
  std::string name;
  std::vector<Date> dates;
  std::vector<double> values;
};

struct PlotSpec {
  std::string title;
  std::string y_label;
  std::vector<PlotSeries> series;
  /// Drawn as dashed vertical lines.
  std::vector<Date> events;
  int width = 820;
  int height = 380;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) { return format_fixed(v, 2); }

inline std::string tick_label(double v) {
  const double a = std::abs(v);
  if (a >= 1e9) return format_fixed(v / 1e9, 1) + "B";
  if (a >= 1e6) return format_fixed(v / 1e6, 1) + "M";
  if (a >= 1e4) return format_fixed(v / 1e3, 0) + "k";
  if (a >= 100) return format_fixed(v, 0);
  return format_fixed(v, 2);
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[i % 6];
}

}  // namespace detail

/// Line chart of dated series. Output depends only on `spec` and `metadata`.
inline std::string render_svg(const PlotSpec& spec, const std::string& metadata = {}) {
  if (spec.series.empty()) throw ValidationError("plot '" + spec.title + "' has no series");
  Date lo = Date(9999, 12, 31);
  Date hi = Date(1, 1, 1);
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (const auto& s : spec.series) {
    if (s.dates.size() != s.values.size() || s.dates.empty())
      throw ValidationError("plot series '" + s.name + "' is empty or has mismatched lengths");
    lo = std::min(lo, s.dates.front());
    hi = std::max(hi, s.dates.back());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  if (!std::isfinite(vmin)) throw ValidationError("plot '" + spec.title + "' has no finite values");
  if (vmin == vmax) {
    vmin -= 1;
    vmax += 1;
  }
  const double pad = 0.05 * (vmax - vmin);
  vmin = vmin >= 0 ? std::max(0.0, vmin - pad) : vmin - pad;
  vmax += pad;

  const double left = 70, right = 20, top = 36, bottom = 46;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  const double span = std::max<long long>(hi - lo, 1);
  auto x = [&](Date d) { return left + pw * static_cast<double>(d - lo) / span; };
  auto y = [&](double v) { return top + ph * (1.0 - (v - vmin) / (vmax - vmin)); };

  std::string out;
  out += R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" + std::to_string(spec.width) + R"(" height=")" +
         std::to_string(spec.height) + R"(" viewBox="0 0 )" + std::to_string(spec.width) + " " +
         std::to_string(spec.height) + R"(" font-family="sans-serif" font-size="11">)" + "\n";
  if (!metadata.empty()) out += "<metadata>" + detail::xml_escape(metadata) + "</metadata>\n";
  out += "<title>" + detail::xml_escape(spec.title) + "</title>\n";
  out += R"(<rect x="0" y="0" width=")" + std::to_string(spec.width) + R"(" height=")" +
         std::to_string(spec.height) + R"(" fill="#ffffff"/>)" + "\n";
  out += R"(<text x=")" + detail::num(left) + R"(" y="20" font-size="14">)" + detail::xml_escape(spec.title) +
         "</text>\n";

  out += "<g class=\"axes\" stroke=\"#333333\">\n";
  out += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top + ph) + "\" x2=\"" +
         detail::num(left + pw) + "\" y2=\"" + detail::num(top + ph) + "\"/>\n";
  out += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" + detail::num(left) +
         "\" y2=\"" + detail::num(top + ph) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" fill=\"#333333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = vmin + (vmax - vmin) * i / 4.0;
    out += "<text x=\"" + detail::num(left - 6) + "\" y=\"" + detail::num(y(v) + 4) + "\" text-anchor=\"end\">" +
           detail::tick_label(v) + "</text>\n";
  }
  {
    const auto ymd = std::chrono::year_month_day(lo.days());
    auto month = std::chrono::year_month(ymd.year(), ymd.month()) + std::chrono::months(1);
    for (int guard = 0; guard < 600; ++guard, month += std::chrono::months(3)) {
      const Date d(std::chrono::sys_days(month / std::chrono::day(1)));
      if (d > hi) break;
      out += "<text x=\"" + detail::num(x(d)) + "\" y=\"" + detail::num(top + ph + 16) +
             "\" text-anchor=\"middle\">" + d.iso().substr(0, 7) + "</text>\n";
    }
  }
  out += "</g>\n";
  out += "<text transform=\"translate(14 " + detail::num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::xml_escape(spec.y_label) + "</text>\n";

  for (const auto& d : spec.events) {
    if (d < lo || d > hi) continue;
    out += "<line class=\"event\" x1=\"" + detail::num(x(d)) + "\" y1=\"" + detail::num(top) + "\" x2=\"" +
           detail::num(x(d)) + "\" y2=\"" + detail::num(top + ph) +
           "\" stroke=\"#777777\" stroke-dasharray=\"4 3\"><title>" + d.iso() + "</title></line>\n";
  }

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    std::string points;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!std::isfinite(s.values[i])) continue;
      points += (points.empty() ? "" : " ") + detail::num(x(s.dates[i])) + "," + detail::num(y(s.values[i]));
    }
    out += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(detail::palette(k)) +
           "\" stroke-width=\"1.2\" points=\"" + points + "\"><title>" + detail::xml_escape(s.name) +
           "</title></polyline>\n";
    const double ly = top + 12 + 14.0 * static_cast<double>(k);
    out += "<text x=\"" + detail::num(left + pw - 4) + "\" y=\"" + detail::num(ly) + "\" text-anchor=\"end\" fill=\"" +
           detail::palette(k) + "\">" + detail::xml_escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace restake::interface
