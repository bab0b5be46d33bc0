#include <doctest.h>

#include "aircast/hours.hpp"
#include "aircast/types.hpp"

using namespace aircast;

TEST_CASE("hour arithmetic anchors at the unix epoch") {
  CHECK(Hour::of(1970, 1, 1, 0).count() == 0);
  CHECK(Hour::of(1970, 1, 2, 0).count() == 24);
  CHECK(Hour::of(1969, 12, 31, 23).count() == -1);
  CHECK(Day::of(1970, 1, 1).count() == 0);
}

TEST_CASE("civil round trip across several decades") {
  for (std::int64_t c : {0L, 1L, 8760L, 262800L, 443424L, -17L, 500000L}) {
    const Hour h{c};
    const Civil cv = h.civil();
    CHECK(Hour::of(cv.year, cv.month, cv.day, cv.hour) == h);
  }
}

TEST_CASE("leap year rules") {
  CHECK(is_leap_year(2000));
  CHECK(is_leap_year(2016));
  CHECK(is_leap_year(2020));
  CHECK_FALSE(is_leap_year(1900));
  CHECK_FALSE(is_leap_year(2019));
  CHECK(hours_in_year(2019) == 8760);
  CHECK(hours_in_year(2020) == 8784);
  CHECK(year_start(2020) + hours_in_year(2020) == year_start(2021));
}

TEST_CASE("parse_hour accepts minute-zero timestamps only") {
  CHECK(parse_hour("2019-03-07T05:00") == Hour::of(2019, 3, 7, 5));
  CHECK(parse_hour("2019-03-07T05:00:00") == Hour::of(2019, 3, 7, 5));
  CHECK_THROWS_AS(parse_hour("2019-03-07T05:30"), ParseError);
  CHECK_THROWS_AS(parse_hour("2019-03-07T05:00:30"), ParseError);
  CHECK_THROWS_AS(parse_hour("2019-03-07 05:00"), ParseError);
  CHECK_THROWS_AS(parse_hour("2019-02-30T00:00"), ParseError);
  CHECK_THROWS_AS(parse_hour("2019-13-01T00:00"), ParseError);
  CHECK_THROWS_AS(parse_hour("garbage"), ParseError);
  CHECK_THROWS_AS(parse_hour("2019-03-07T24:00"), ParseError);
}

TEST_CASE("hour formatting round trips") {
  const Hour h = Hour::of(2021, 11, 30, 23);
  CHECK(to_string(h) == "2021-11-30T23:00");
  CHECK(parse_hour(to_string(h)) == h);
}

TEST_CASE("parse_day is strict ISO") {
  CHECK(parse_day("2018-02-28") == Day::of(2018, 2, 28));
  CHECK(Day::of(2018, 2, 28).iso() == "2018-02-28");
  CHECK_THROWS_AS(parse_day("2018-2-28"), ParseError);
  CHECK_THROWS_AS(parse_day("2018-02-30"), ParseError);
  CHECK_THROWS_AS(parse_day("2018-02-28T00:00"), ParseError);
}

TEST_CASE("blocks quarter the day") {
  const Day d = Day::of(2019, 6, 1);
  CHECK(d.block_start(Block::I) == d.start());
  CHECK(d.block_start(Block::II) == d.start() + 6);
  CHECK(d.block_start(Block::III) == d.start() + 12);
  CHECK(d.block_start(Block::IV) == d.start() + 18);
  CHECK(day_of(d.block_start(Block::IV) + 5) == d);
  CHECK(day_of(d.block_start(Block::IV) + 6) == d + 1);
}

TEST_CASE("day and year accessors agree with civil fields") {
  const Hour h = Hour::of(2020, 12, 31, 18);
  CHECK(h.year() == 2020);
  CHECK(h.month() == 12);
  CHECK(h.hour_of_day() == 18);
  CHECK((h + 6).year() == 2021);
  CHECK(day_of(h).year() == 2020);
}
