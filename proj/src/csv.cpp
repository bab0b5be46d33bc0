#include "aircast/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace aircast {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_concentration(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("line " + std::to_string(line_no) + ": bad concentration '" + field + "'");
  if (!std::isfinite(value) || value < 0.0)
    throw ParseError("line " + std::to_string(line_no) + ": concentration must be finite and non-negative, got '" +
                     field + "'");
  return value;
}

}  // namespace

std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input: no header row");
  const std::vector<std::string> header = split_fields(strip_cr(line));

  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("header is missing column '" + name + "'");
  };
  const std::size_t station_col = column_of(schema.station);
  const std::size_t datetime_col = column_of(schema.datetime);
  const std::size_t no2_col = column_of(schema.no2);

  std::vector<RawRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    RawRecord rec;
    rec.station_id = fields[station_col];
    if (rec.station_id.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty station token");
    try {
      rec.timestamp = parse_hour(fields[datetime_col]);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string& concentration = fields[no2_col];
    if (concentration.empty()) {
      rec.valid = false;
    } else {
      rec.no2 = parse_concentration(concentration, line_no);
      rec.valid = true;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> read_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file: " + path);
  return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const std::vector<RawRecord>& records) {
  out << "station,datetime,no2\n";
  char buf[40];
  for (const RawRecord& rec : records) {
    out << rec.station_id << ',' << to_string(rec.timestamp) << ',';
    if (rec.valid) {
      std::snprintf(buf, sizeof buf, "%.17g", rec.no2);
      out << buf;
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  write_csv(out, records);
  if (!out) throw ParseError("write failed: " + path);
}

}  // namespace aircast
