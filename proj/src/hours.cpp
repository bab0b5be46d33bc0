#include "aircast/hours.hpp"

#include <charconv>
#include <chrono>

namespace aircast {

namespace {

namespace chr = std::chrono;

std::int64_t civil_to_days(int year, int month, int day) {
  const chr::year_month_day ymd{chr::year(year), chr::month(static_cast<unsigned>(month)),
                                chr::day(static_cast<unsigned>(day))};
  if (!ymd.ok())
    throw InvalidArgument("invalid calendar date: " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
  return chr::sys_days(ymd).time_since_epoch().count();
}

Civil days_to_civil(std::int64_t days) {
  const chr::year_month_day ymd{chr::sys_days(chr::days(days))};
  Civil c;
  c.year = static_cast<int>(ymd.year());
  c.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  c.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  return c;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

int parse_int_field(std::string_view text, std::size_t pos, std::size_t len,
                    std::string_view what) {
  if (pos + len > text.size()) throw ParseError(std::string("timestamp too short: ") + std::string(text));
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len)
    throw ParseError("bad " + std::string(what) + " in: " + std::string(text));
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw ParseError("malformed timestamp: " + std::string(text));
}

}  // namespace

Hour Hour::of(int year, int month, int day, int hour) {
  if (hour < 0 || hour > 23)
    throw InvalidArgument("hour of day out of range: " + std::to_string(hour));
  return Hour(civil_to_days(year, month, day) * 24 + hour);
}

Civil Hour::civil() const {
  Civil c = days_to_civil(day_count());
  c.hour = hour_of_day();
  return c;
}

int Hour::year() const { return civil().year; }
int Hour::month() const { return civil().month; }

int Hour::hour_of_day() const {
  return static_cast<int>(count_ - day_count() * 24);
}

std::int64_t Hour::day_count() const { return floor_div(count_, 24); }

Day Day::of(int year, int month, int day) {
  return Day(civil_to_days(year, month, day));
}

Civil Day::civil() const { return days_to_civil(count_); }

int Day::year() const { return civil().year; }

std::string Day::iso() const {
  const Civil c = civil();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

Hour parse_hour(std::string_view text) {
  // YYYY-MM-DDTHH:MM or YYYY-MM-DDTHH:MM:SS
  if (text.size() != 16 && text.size() != 19)
    throw ParseError("malformed timestamp: " + std::string(text));
  const int year = parse_int_field(text, 0, 4, "year");
  expect_char(text, 4, '-');
  const int month = parse_int_field(text, 5, 2, "month");
  expect_char(text, 7, '-');
  const int day = parse_int_field(text, 8, 2, "day");
  expect_char(text, 10, 'T');
  const int hour = parse_int_field(text, 11, 2, "hour");
  expect_char(text, 13, ':');
  const int minute = parse_int_field(text, 14, 2, "minute");
  if (text.size() == 19) {
    expect_char(text, 16, ':');
    const int second = parse_int_field(text, 17, 2, "second");
    if (second != 0) throw ParseError("timestamp not on the hour: " + std::string(text));
  }
  if (minute != 0) throw ParseError("timestamp not on the hour: " + std::string(text));
  if (hour < 0 || hour > 23) throw ParseError("hour out of range: " + std::string(text));
  try {
    return Hour::of(year, month, day, hour);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

Day parse_day(std::string_view text) {
  if (text.size() != 10)
    throw ParseError("malformed date: " + std::string(text));
  const int year = parse_int_field(text, 0, 4, "year");
  expect_char(text, 4, '-');
  const int month = parse_int_field(text, 5, 2, "month");
  expect_char(text, 7, '-');
  const int day = parse_int_field(text, 8, 2, "day");
  try {
    return Day::of(year, month, day);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

std::string to_string(Hour h) {
  const Civil c = h.civil();
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00", c.year, c.month, c.day, c.hour);
  return buf;
}

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int hours_in_year(int year) { return is_leap_year(year) ? 8784 : 8760; }

Hour year_start(int year) { return Day::of(year, 1, 1).start(); }

}  // namespace aircast
