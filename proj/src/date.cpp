#include "fomc_absa/date.hpp"

#include <charconv>
#include <cstdio>

namespace fomc_absa {
namespace {

bool parse_digits(std::string_view text, int& out) {
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_iso_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Month Month::of(const Date& date) {
  return Month{static_cast<int>(date.year()), static_cast<unsigned>(date.month())};
}

std::optional<Month> Month::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  int y = 0, m = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m)) {
    return std::nullopt;
  }
  if (m < 1 || m > 12) return std::nullopt;
  return Month{y, static_cast<unsigned>(m)};
}

Month Month::plus(int months) const {
  int index = year * 12 + static_cast<int>(month) - 1 + months;
  int y = index >= 0 ? index / 12 : (index - 11) / 12;
  return Month{y, static_cast<unsigned>(index - y * 12 + 1)};
}

Date Month::first_day() const {
  return Date{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{1}};
}

std::string Month::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", year, month);
  return buf;
}

}  // namespace fomc_absa
