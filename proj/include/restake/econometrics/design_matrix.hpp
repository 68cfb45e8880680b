#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"

namespace restake::econ {

struct Column {
  std::string name;
  std::vector<double> values;

  bool operator==(const Column&) const = default;
};

inline constexpr const char* kInterceptName = "(Intercept)";

/// Response vector plus named regressors on a strictly daily date index. The
/// intercept is implicit: matrix() prepends a constant column.
class DesignMatrix {
 public:
  DesignMatrix() = default;

  DesignMatrix(std::vector<Date> dates, std::string y_name, std::vector<double> y,
               std::vector<Column> columns)
      : dates_(std::move(dates)), y_name_(std::move(y_name)), y_(std::move(y)),
        columns_(std::move(columns)) {
    validate();
  }

  /// Builds a matrix on consecutive days from `start`.
  static DesignMatrix on_days(std::vector<double> y, std::vector<Column> columns,
                              Date start = Date(2024, 1, 1), std::string y_name = "y") {
    std::vector<Date> dates(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) dates[i] = start + static_cast<long long>(i);
    return DesignMatrix(std::move(dates), std::move(y_name), std::move(y), std::move(columns));
  }

  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::string& y_name() const noexcept { return y_name_; }
  const std::vector<double>& y() const noexcept { return y_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  std::size_t n() const noexcept { return y_.size(); }
  /// Parameter count including the intercept.
  std::size_t k() const noexcept { return columns_.size() + 1; }

  const Column& column(const std::string& name) const {
    for (const auto& c : columns_)
      if (c.name == name) return c;
    throw ValidationError("no column named '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const Column& c) { return c.name == name; });
  }

  /// Parameter names in coefficient order.
  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names{kInterceptName};
    for (const auto& c : columns_) names.push_back(c.name);
    return names;
  }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(k()));
    for (std::size_t i = 0; i < n(); ++i) {
      x(static_cast<Eigen::Index>(i), 0) = 1.0;
      for (std::size_t j = 0; j < columns_.size(); ++j)
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = columns_[j].values[i];
    }
    return x;
  }

  Eigen::VectorXd response() const {
    return Eigen::Map<const Eigen::VectorXd>(y_.data(), static_cast<Eigen::Index>(y_.size()));
  }

  /// Rows [begin, end).
  DesignMatrix rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > n()) throw ValidationError("row range out of bounds");
    std::vector<Column> cols;
    for (const auto& c : columns_)
      cols.push_back({c.name, std::vector<double>(c.values.begin() + static_cast<std::ptrdiff_t>(begin),
                                                  c.values.begin() + static_cast<std::ptrdiff_t>(end))});
    return DesignMatrix(std::vector<Date>(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                                          dates_.begin() + static_cast<std::ptrdiff_t>(end)),
                        y_name_,
                        std::vector<double>(y_.begin() + static_cast<std::ptrdiff_t>(begin),
                                            y_.begin() + static_cast<std::ptrdiff_t>(end)),
                        std::move(cols));
  }

  DesignMatrix without(const std::set<std::string>& drop) const {
    std::vector<Column> cols;
    for (const auto& c : columns_)
      if (!drop.contains(c.name)) cols.push_back(c);
    return DesignMatrix(dates_, y_name_, y_, std::move(cols));
  }

  DesignMatrix with_response(std::string name, std::vector<double> y) const {
    return DesignMatrix(dates_, std::move(name), std::move(y), columns_);
  }

  bool operator==(const DesignMatrix&) const = default;

 private:
  void validate() const {
    if (dates_.size() != y_.size())
      throw ValidationError("design matrix: dates and response lengths differ");
    std::set<std::string> names;
    for (const auto& c : columns_) {
      if (c.values.size() != y_.size())
        throw ValidationError("design matrix: column '" + c.name + "' has the wrong length");
      if (c.name == kInterceptName || !names.insert(c.name).second)
        throw ValidationError("design matrix: duplicate column name '" + c.name + "'");
      for (double v : c.values)
        if (!std::isfinite(v))
          throw ValidationError("design matrix: column '" + c.name + "' has a missing value");
    }
    for (double v : y_)
      if (!std::isfinite(v)) throw ValidationError("design matrix: response has a missing value");
    for (std::size_t i = 1; i < dates_.size(); ++i)
      if (dates_[i] - dates_[i - 1] != 1)
        throw ValidationError("design matrix: dates must be consecutive days (break at " +
                              dates_[i].iso() + ")");
  }

  std::vector<Date> dates_;
  std::string y_name_ = "y";
  std::vector<double> y_;
  std::vector<Column> columns_;
};

/// Non-intercept columns that are constant over the sample (e.g. an event
/// dummy with no events in a subsample). Such a column is collinear with the
/// intercept.
inline std::vector<std::string> degenerate_columns(const DesignMatrix& x) {
  std::vector<std::string> out;
  for (const auto& c : x.columns()) {
    if (c.values.empty()) continue;
    const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
    if (*lo == *hi) out.push_back(c.name);
  }
  return out;
}

struct DroppedColumns {
  DesignMatrix matrix;
  std::vector<std::string> warnings;
};

inline DroppedColumns drop_degenerate_columns(const DesignMatrix& x) {
  const auto bad = degenerate_columns(x);
  DroppedColumns out{x, {}};
  if (bad.empty()) return out;
  out.matrix = x.without(std::set<std::string>(bad.begin(), bad.end()));
  for (const auto& name : bad)
    out.warnings.push_back("column '" + name + "' is constant over the sample and was dropped");
  return out;
}

}  // namespace restake::econ
