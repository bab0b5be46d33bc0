#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "aircast/types.hpp"

namespace aircast {

struct Civil {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
};

// One civil hour, counted from 1970-01-01T00:00. The pipeline treats every
// timestamp as local civil time; there is no timezone handling anywhere.
class Hour {
 public:
  constexpr Hour() = default;
  constexpr explicit Hour(std::int64_t count) : count_(count) {}

  static Hour of(int year, int month, int day, int hour);

  constexpr std::int64_t count() const { return count_; }

  Civil civil() const;
  int year() const;
  int month() const;
  int hour_of_day() const;
  std::int64_t day_count() const;  // civil days since 1970-01-01

  constexpr Hour operator+(std::int64_t hours) const { return Hour(count_ + hours); }
  constexpr Hour operator-(std::int64_t hours) const { return Hour(count_ - hours); }
  constexpr std::int64_t operator-(Hour other) const { return count_ - other.count_; }
  Hour& operator+=(std::int64_t hours) { count_ += hours; return *this; }
  Hour& operator++() { ++count_; return *this; }

  friend constexpr bool operator==(Hour a, Hour b) { return a.count_ == b.count_; }
  friend constexpr auto operator<=>(Hour a, Hour b) { return a.count_ <=> b.count_; }

 private:
  std::int64_t count_ = 0;
};

// One civil day, counted from 1970-01-01.
class Day {
 public:
  constexpr Day() = default;
  constexpr explicit Day(std::int64_t count) : count_(count) {}

  static Day of(int year, int month, int day);

  constexpr std::int64_t count() const { return count_; }
  constexpr Hour start() const { return Hour(count_ * 24); }
  Hour block_start(Block block) const { return start() + block_start_hour(block); }

  Civil civil() const;
  int year() const;
  std::string iso() const;  // YYYY-MM-DD

  constexpr Day operator+(std::int64_t days) const { return Day(count_ + days); }
  Day& operator++() { ++count_; return *this; }

  friend constexpr bool operator==(Day a, Day b) { return a.count_ == b.count_; }
  friend constexpr auto operator<=>(Day a, Day b) { return a.count_ <=> b.count_; }

 private:
  std::int64_t count_ = 0;
};

inline Day day_of(Hour h) { return Day(h.day_count()); }

// Accepts YYYY-MM-DDTHH:MM with an optional :SS tail; minutes and seconds
// must be zero. Throws ParseError otherwise.
Hour parse_hour(std::string_view text);

// Accepts strict YYYY-MM-DD.
Day parse_day(std::string_view text);

// Formats as YYYY-MM-DDTHH:00.
std::string to_string(Hour h);

bool is_leap_year(int year);
int hours_in_year(int year);
Hour year_start(int year);

}  // namespace aircast
