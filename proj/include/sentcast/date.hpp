#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace sentcast {

/// Day-precision UTC calendar date.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

  /// Throws DataError unless `text` is a valid `YYYY-MM-DD` date. A trailing
  /// time component (`T...` or ` ...`) is accepted and truncated.
  static Date parse(std::string_view text);
  static Date from_ymd(int year, unsigned month, unsigned day);

  [[nodiscard]] std::string iso() const;
  [[nodiscard]] constexpr std::chrono::sys_days days() const { return days_; }
  [[nodiscard]] std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  [[nodiscard]] bool is_weekend() const;
  /// Seconds since the Unix epoch at 00:00 UTC.
  [[nodiscard]] long long unix_seconds() const;

  [[nodiscard]] Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace sentcast
