#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aircast/hours.hpp"

namespace aircast {

struct RawRecord {
  std::string station_id;
  Hour timestamp;
  double no2 = 0.0;
  bool valid = false;  // false = missing measurement
};

// Column header names in the input CSV.
struct CsvSchema {
  std::string station = "station";
  std::string datetime = "datetime";
  std::string no2 = "no2";
};

// Parses the canonical CSV layout: a header row naming the schema columns,
// then one row per station-hour. An empty concentration field means missing.
// Unknown station tokens are accepted here; filtering happens in build_grid.
// Throws ParseError naming the 1-based line of the first malformed row.
std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema = {});

std::vector<RawRecord> read_csv(const std::string& path, const CsvSchema& schema = {});

void write_csv(std::ostream& out, const std::vector<RawRecord>& records);
void write_csv(const std::string& path, const std::vector<RawRecord>& records);

}  // namespace aircast
