#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace fomc_absa {

using Date = std::chrono::year_month_day;

// Strict YYYY-MM-DD. Rejects impossible calendar dates such as 2021-02-30.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

// A calendar month, the unit all series are keyed on.
struct Month {
  int year = 0;
  unsigned month = 1;  // 1..12

  static Month of(const Date& date);
  static std::optional<Month> parse(std::string_view text);  // YYYY-MM

  Month plus(int months) const;
  Date first_day() const;
  std::string to_string() const;

  auto operator<=>(const Month&) const = default;
};

}  // namespace fomc_absa
