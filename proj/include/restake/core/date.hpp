#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "restake/core/error.hpp"

namespace restake {

/// Calendar date with day arithmetic; ISO-8601 (YYYY-MM-DD) text form.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}) {}

  static Date parse(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    const std::string s(text);
    if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 ||
        s[4] != '-' || s[7] != '-') {
      throw DataError("invalid ISO date '" + s + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + s + "'");
    return Date(std::chrono::sys_days(ymd));
  }

  static Date from_unix_seconds(long long seconds) {
    return Date(std::chrono::floor<std::chrono::days>(
        std::chrono::sys_seconds(std::chrono::seconds(seconds))));
  }

  std::string iso() const {
    const std::chrono::year_month_day ymd(days_);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  constexpr std::chrono::sys_days days() const { return days_; }
  constexpr long long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date operator+(long long n) const { return Date(days_ + std::chrono::days(n)); }
  constexpr Date operator-(long long n) const { return Date(days_ - std::chrono::days(n)); }
  constexpr long long operator-(Date other) const { return (days_ - other.days_).count(); }
  Date& operator++() {
    days_ += std::chrono::days(1);
    return *this;
  }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

/// Number of days in the closed range [first, last].
inline long long days_inclusive(Date first, Date last) { return (last - first) + 1; }

}  // namespace restake
