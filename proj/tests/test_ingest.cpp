#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "aircast/csv.hpp"
#include "aircast/grid.hpp"
#include "aircast/hours.hpp"

using namespace aircast;

namespace {

std::vector<RawRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

// Grid over [start, start + hours) with every cell observed and value
// station*1000 + hour, so any cell's origin can be read off its value.
HourlyGrid coded_grid(Index stations, Index hours, Hour start) {
  HourlyGrid g;
  g.start = start;
  for (Index s = 0; s < stations; ++s) g.station_ids.push_back("S" + std::to_string(s));
  g.values.resize(stations, hours);
  g.mask = BoolGrid::Constant(stations, hours, true);
  for (Index s = 0; s < stations; ++s)
    for (Index t = 0; t < hours; ++t) g.values(s, t) = 1000.0 * static_cast<double>(s) + static_cast<double>(t);
  return g;
}

}  // namespace

TEST_CASE("parse_csv reads records and flags missing values") {
  const auto recs = parse(
      "station,datetime,no2\n"
      "A,2019-01-01T00:00,12.5\n"
      "B,2019-01-01T00:00,\n"
      "A,2019-01-01T01:00,0\n");
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].station_id == "A");
  CHECK(recs[0].timestamp == Hour::of(2019, 1, 1, 0));
  CHECK(recs[0].no2 == 12.5);
  CHECK(recs[0].valid);
  CHECK_FALSE(recs[1].valid);
  CHECK(recs[2].valid);
  CHECK(recs[2].no2 == 0.0);
}

TEST_CASE("parse_csv tolerates column order, extra columns and CRLF") {
  std::istringstream in("no2,station,datetime,extra\r\n7,A,2019-01-01T00:00,x\r\n");
  const auto recs = parse_csv(in);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].no2 == 7.0);
  CHECK(recs[0].station_id == "A");
}

TEST_CASE("parse_csv reports the offending line") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_WITH_AS(parse("station,datetime\nA,2019-01-01T00:00\n"),
                       "header is missing column 'no2'", ParseError);
  // field count
  CHECK_THROWS_WITH_AS(parse("station,datetime,no2\nA,2019-01-01T00:00\n"),
                       "line 2: expected 3 fields, got 2", ParseError);
  // bad number, bad hour, negative concentration
  CHECK_THROWS_AS(parse("station,datetime,no2\nA,2019-01-01T00:00,abc\n"), ParseError);
  CHECK_THROWS_AS(parse("station,datetime,no2\nA,2019-01-01T00:30,1\n"), ParseError);
  CHECK_THROWS_AS(parse("station,datetime,no2\nA,2019-01-01T00:00,-1\n"), ParseError);
  CHECK_THROWS_AS(parse("station,datetime,no2\n,2019-01-01T00:00,1\n"), ParseError);
}

TEST_CASE("csv write/read round trip") {
  std::vector<RawRecord> recs;
  recs.push_back({"A", Hour::of(2019, 1, 1, 0), 12.625, true});
  recs.push_back({"B", Hour::of(2019, 1, 1, 1), 0.1, true});
  recs.push_back({"A", Hour::of(2019, 1, 1, 2), 0.0, false});
  std::ostringstream out;
  write_csv(out, recs);
  const auto back = parse(out.str());
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].station_id == recs[i].station_id);
    CHECK(back[i].timestamp == recs[i].timestamp);
    CHECK(back[i].valid == recs[i].valid);
    if (recs[i].valid) CHECK(back[i].no2 == recs[i].no2);
  }
}

TEST_CASE("build_grid keeps the last duplicate and ignores out-of-range rows") {
  const Hour start = Hour::of(2019, 1, 1, 0);
  std::vector<RawRecord> recs;
  recs.push_back({"A", start, 1.0, true});
  recs.push_back({"A", start, 2.0, true});           // duplicate, wins
  recs.push_back({"B", start + 1, 3.0, true});
  recs.push_back({"C", start, 9.0, true});           // unknown station
  recs.push_back({"A", start + 99, 9.0, true});      // outside range
  recs.push_back({"B", start - 1, 9.0, true});       // before range
  const BuildResult built = build_grid(recs, {"A", "B"}, start, start + 3);
  CHECK(built.duplicates == 1);
  const HourlyGrid& g = built.grid;
  REQUIRE(g.stations() == 2);
  REQUIRE(g.hours() == 3);
  CHECK(g.values(0, 0) == 2.0);
  CHECK(g.mask(0, 0));
  CHECK(g.values(1, 1) == 3.0);
  CHECK_FALSE(g.mask(0, 1));
  CHECK_FALSE(g.mask(1, 0));
  CHECK(g.station_index("B") == 1);
  CHECK(g.index_of(start + 2) == 2);
  CHECK(g.index_of(start + 3) == -1);
}

TEST_CASE("stations_in returns sorted unique tokens") {
  std::vector<RawRecord> recs;
  recs.push_back({"B", Hour{0}, 1.0, true});
  recs.push_back({"A", Hour{1}, 1.0, false});
  recs.push_back({"B", Hour{2}, 1.0, true});
  CHECK(stations_in(recs) == std::vector<std::string>{"A", "B"});
}

TEST_CASE("impute_monthly_mean fills gaps with the station's month mean") {
  // Two months of January/February 2019, station 0 missing one Jan cell.
  const Hour start = Hour::of(2019, 1, 31, 22);
  HourlyGrid g = coded_grid(2, 6, start);  // Jan 31 22:00 .. Feb 1 04:00
  // station 0: Jan hours (t=0,1) values 10, 20; Feb hours 1,2,3,4
  g.values(0, 0) = 10.0;
  g.values(0, 1) = 20.0;
  g.values(0, 2) = 1.0;
  g.values(0, 3) = 2.0;
  g.values(0, 4) = 3.0;
  g.values(0, 5) = 4.0;
  g.mask(0, 1) = false;  // missing Jan cell -> mean of remaining Jan = 10
  g.mask(0, 3) = false;  // missing Feb cell -> mean of 1,3,4 = 8/3

  const HourlyGrid filled = impute_monthly_mean(g);
  CHECK(filled.mask.all());
  CHECK(filled.values(0, 1) == 10.0);
  CHECK(filled.values(0, 3) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(filled.values(0, 0) == 10.0);  // observed cells untouched
  CHECK(filled.values(1, 2) == g.values(1, 2));
}

TEST_CASE("impute_monthly_mean falls back to annual then global means") {
  const Hour start = Hour::of(2019, 1, 31, 23);
  HourlyGrid g = coded_grid(2, 2, start);  // one Jan hour, one Feb hour
  g.values(0, 0) = 40.0;  // station 0 observed only in Jan
  g.mask(0, 1) = false;   // Feb cell: no Feb data -> station annual mean 40
  g.values(1, 0) = 7.0;
  g.values(1, 1) = 9.0;
  HourlyGrid filled = impute_monthly_mean(g);
  CHECK(filled.values(0, 1) == 40.0);

  g.mask(0, 0) = false;  // station 0 fully missing -> grid-wide mean 8
  filled = impute_monthly_mean(g);
  CHECK(filled.values(0, 0) == 8.0);
  CHECK(filled.values(0, 1) == 8.0);

  g.mask(1, 0) = false;
  g.mask(1, 1) = false;
  CHECK_THROWS_AS(impute_monthly_mean(g), InvalidArgument);
}

TEST_CASE("fit_minmax and apply_minmax") {
  const Hour start = Hour::of(2019, 1, 1, 0);
  HourlyGrid g = coded_grid(2, 4, start);
  g.values.row(0) << 2.0, 6.0, 4.0, 100.0;
  g.values.row(1) << 5.0, 5.0, 5.0, -3.0;

  // fit on the first three hours only
  const NormalizationParams params = fit_minmax(g, start, start + 3);
  CHECK(params.min(0) == 2.0);
  CHECK(params.max(0) == 6.0);
  CHECK(params.min(1) == 5.0);
  CHECK(params.max(1) == 5.0);
  CHECK(params.fit_start == start);
  CHECK(params.fit_end == start + 3);

  const HourlyGrid scaled = apply_minmax(g, params);
  CHECK(scaled.values(0, 0) == 0.0);
  CHECK(scaled.values(0, 1) == 1.0);
  CHECK(scaled.values(0, 2) == 0.5);
  CHECK(scaled.values(0, 3) == doctest::Approx((100.0 - 2.0) / 4.0));  // not clipped
  CHECK(scaled.values(1, 0) == 0.0);  // degenerate station maps to 0
  CHECK(scaled.values(1, 3) == 0.0);
}

TEST_CASE("fit range must intersect the grid") {
  const Hour start = Hour::of(2019, 1, 1, 0);
  const HourlyGrid g = coded_grid(1, 4, start);
  CHECK_THROWS_AS(fit_minmax(g, start + 100, start + 200), InvalidArgument);
}

TEST_CASE("grid text format round trips bitwise, mask included") {
  const Hour start = Hour::of(2019, 6, 1, 0);
  HourlyGrid g = coded_grid(3, 5, start);
  g.values(1, 2) = 0.1 + 0.2;  // value that needs 17 digits
  g.mask(2, 4) = false;
  g.mask(0, 0) = false;

  std::ostringstream out;
  save_grid(out, g);
  std::istringstream in(out.str());
  const HourlyGrid back = load_grid(in);

  CHECK(back.station_ids == g.station_ids);
  CHECK(back.start == g.start);
  REQUIRE(back.hours() == g.hours());
  REQUIRE(back.stations() == g.stations());
  for (Index s = 0; s < g.stations(); ++s)
    for (Index t = 0; t < g.hours(); ++t) {
      CHECK(back.mask(s, t) == g.mask(s, t));
      if (g.mask(s, t)) CHECK(back.values(s, t) == g.values(s, t));
    }

  std::ostringstream again;
  save_grid(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("load_grid rejects tampered headers") {
  const HourlyGrid g = coded_grid(1, 2, Hour::of(2019, 1, 1, 0));
  std::ostringstream out;
  save_grid(out, g);
  std::string text = out.str();
  text[0] = 'x';
  std::istringstream in(text);
  CHECK_THROWS_AS(load_grid(in), ParseError);
}

TEST_CASE("normalization json round trip") {
  NormalizationParams p;
  p.station_ids = {"A", "B"};
  p.min = Vector(2);
  p.max = Vector(2);
  p.min << 0.5, -1.25;
  p.max << 90.0, 0.1 + 0.2;
  p.fit_start = Hour::of(2015, 1, 1, 0);
  p.fit_end = Hour::of(2018, 1, 1, 0);

  const std::string text = normalization_to_json(p);
  const NormalizationParams back = normalization_from_json(text);
  CHECK(back.station_ids == p.station_ids);
  CHECK(back.min == p.min);
  CHECK(back.max == p.max);
  CHECK(back.fit_start == p.fit_start);
  CHECK(back.fit_end == p.fit_end);
  CHECK(normalization_to_json(back) == text);
  CHECK(back.index_of("B") == 1);
  CHECK_THROWS_AS(normalization_from_json("not json"), ParseError);
}

TEST_CASE("records_from_grid emits observed cells station-major") {
  HourlyGrid g = coded_grid(2, 2, Hour::of(2019, 1, 1, 0));
  g.mask(0, 1) = false;
  const auto recs = records_from_grid(g);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].station_id == "S0");
  CHECK(recs[0].timestamp == g.start);
  CHECK(recs[1].station_id == "S1");
  CHECK(recs[2].station_id == "S1");
  CHECK(recs[2].timestamp == g.start + 1);
}
