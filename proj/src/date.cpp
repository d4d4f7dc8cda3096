#include "sentcast/date.hpp"

#include <charconv>

#include <fmt/format.h>

#include "sentcast/error.hpp"

namespace sentcast {

namespace {

template <typename T>
bool parse_digits(std::string_view text, T& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date Date::parse(std::string_view text) {
  std::string_view day_part = text.substr(0, 10);
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') {
    throw DataError(fmt::format("invalid date '{}'", text));
  }
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (day_part.size() != 10 || day_part[4] != '-' || day_part[7] != '-' ||
      !parse_digits(day_part.substr(0, 4), y) || !parse_digits(day_part.substr(5, 2), m) ||
      !parse_digits(day_part.substr(8, 2), d)) {
    throw DataError(fmt::format("invalid date '{}'", text));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw DataError(fmt::format("invalid date '{}'", text));
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw DataError(fmt::format("invalid date {}-{}-{}", year, month, day));
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  const auto d = ymd();
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

bool Date::is_weekend() const {
  const std::chrono::weekday wd{days_};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

long long Date::unix_seconds() const {
  return static_cast<long long>(days_.time_since_epoch().count()) * 86400LL;
}

}  // namespace sentcast
