#include "aircast/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace aircast {

namespace {

constexpr const char* kGridMagic = "aircast-grid";
constexpr int kGridVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double_strict(const std::string& field, const std::string& context) {
  double value = 0.0;
  const char* first = field.data();
  auto [ptr, ec] = std::from_chars(first, first + field.size(), value);
  if (ec != std::errc() || ptr != first + field.size())
    throw ParseError(context + ": bad number '" + field + "'");
  return value;
}

std::vector<std::string> split_line(const std::string& line) {
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

}  // namespace

Index HourlyGrid::station_index(const std::string& id) const {
  for (Index s = 0; s < static_cast<Index>(station_ids.size()); ++s)
    if (station_ids[static_cast<std::size_t>(s)] == id) return s;
  return -1;
}

void HourlyGrid::validate() const {
  const Index S = stations();
  const Index T = hours();
  if (static_cast<Index>(station_ids.size()) != S)
    throw InvalidArgument("grid: station id count does not match row count");
  if (mask.rows() != S || mask.cols() != T)
    throw InvalidArgument("grid: mask shape does not match values shape");
  for (std::size_t i = 0; i < station_ids.size(); ++i)
    for (std::size_t j = i + 1; j < station_ids.size(); ++j)
      if (station_ids[i] == station_ids[j])
        throw InvalidArgument("grid: duplicate station id '" + station_ids[i] + "'");
  for (Index s = 0; s < S; ++s)
    for (Index t = 0; t < T; ++t)
      if (mask(s, t) && (!std::isfinite(values(s, t)) || values(s, t) < 0.0))
        throw InvalidArgument("grid: observed cell is not finite and non-negative at station " +
                              station_ids[static_cast<std::size_t>(s)] + ", " + to_string(start + t));
}

BuildResult build_grid(const std::vector<RawRecord>& records, std::vector<std::string> stations,
                       Hour start, Hour end) {
  if (stations.empty()) throw InvalidArgument("build_grid: station list is empty");
  if (!(start < end)) throw InvalidArgument("build_grid: empty hour range");
  const Index S = static_cast<Index>(stations.size());
  const Index T = static_cast<Index>(end - start);

  std::unordered_map<std::string, Index> row_of;
  for (Index s = 0; s < S; ++s) {
    auto [it, inserted] = row_of.emplace(stations[static_cast<std::size_t>(s)], s);
    if (!inserted) throw InvalidArgument("build_grid: duplicate station '" + stations[static_cast<std::size_t>(s)] + "'");
  }

  BuildResult result;
  result.grid.station_ids = std::move(stations);
  result.grid.start = start;
  result.grid.values = Matrix::Zero(S, T);
  result.grid.mask = BoolGrid::Constant(S, T, false);
  BoolGrid seen = BoolGrid::Constant(S, T, false);

  for (const RawRecord& rec : records) {
    const auto it = row_of.find(rec.station_id);
    if (it == row_of.end()) continue;
    const std::int64_t offset = rec.timestamp - start;
    if (offset < 0 || offset >= T) continue;
    const Index s = it->second;
    const Index t = static_cast<Index>(offset);
    if (seen(s, t)) ++result.duplicates;
    seen(s, t) = true;
    result.grid.mask(s, t) = rec.valid;
    result.grid.values(s, t) = rec.valid ? rec.no2 : 0.0;
  }
  return result;
}

std::vector<std::string> stations_in(const std::vector<RawRecord>& records) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const RawRecord& rec : records) ids.push_back(rec.station_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

HourlyGrid impute_monthly_mean(const HourlyGrid& grid) {
  const Index S = grid.stations();
  const Index T = grid.hours();

  // (year, month) key per column, computed once.
  std::vector<std::pair<int, int>> ym(static_cast<std::size_t>(T));
  std::vector<int> year_of(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    const Civil c = grid.hour_at(t).civil();
    ym[static_cast<std::size_t>(t)] = {c.year, c.month};
    year_of[static_cast<std::size_t>(t)] = c.year;
  }

  double grid_sum = 0.0;
  std::int64_t grid_count = 0;
  for (Index s = 0; s < S; ++s) {
    for (Index t = 0; t < T; ++t) {
      if (!grid.mask(s, t)) continue;
      grid_sum += grid.values(s, t);
      ++grid_count;
    }
  }
  if (grid_count == 0) throw InvalidArgument("impute_monthly_mean: grid has no observed values");
  const double grid_mean = grid_sum / static_cast<double>(grid_count);

  struct MeanAcc {
    double sum = 0.0;
    std::int64_t count = 0;
  };

  HourlyGrid out = grid;
  for (Index s = 0; s < S; ++s) {
    std::map<std::pair<int, int>, MeanAcc> monthly;
    std::map<int, MeanAcc> annual;
    for (Index t = 0; t < T; ++t) {
      if (!grid.mask(s, t)) continue;
      const double v = grid.values(s, t);
      MeanAcc& m = monthly[ym[static_cast<std::size_t>(t)]];
      m.sum += v;
      ++m.count;
      MeanAcc& a = annual[year_of[static_cast<std::size_t>(t)]];
      a.sum += v;
      ++a.count;
    }
    for (Index t = 0; t < T; ++t) {
      if (grid.mask(s, t)) continue;
      const auto mit = monthly.find(ym[static_cast<std::size_t>(t)]);
      if (mit != monthly.end() && mit->second.count > 0) {
        out.values(s, t) = mit->second.sum / static_cast<double>(mit->second.count);
      } else {
        const auto ait = annual.find(year_of[static_cast<std::size_t>(t)]);
        if (ait != annual.end() && ait->second.count > 0)
          out.values(s, t) = ait->second.sum / static_cast<double>(ait->second.count);
        else
          out.values(s, t) = grid_mean;
      }
      out.mask(s, t) = true;
    }
  }
  return out;
}

Index NormalizationParams::index_of(const std::string& id) const {
  for (Index s = 0; s < static_cast<Index>(station_ids.size()); ++s)
    if (station_ids[static_cast<std::size_t>(s)] == id) return s;
  return -1;
}

NormalizationParams fit_minmax(const HourlyGrid& grid, Hour start, Hour end) {
  const Hour lo = std::max(start, grid.start);
  const Hour hi = std::min(end, grid.end());
  if (!(lo < hi)) throw InvalidArgument("fit_minmax: empty normalization range");
  const Index t0 = grid.index_of(lo);
  const Index t1 = t0 + static_cast<Index>(hi - lo);

  const Index S = grid.stations();
  NormalizationParams params;
  params.station_ids = grid.station_ids;
  params.min = Vector::Zero(S);
  params.max = Vector::Zero(S);
  params.fit_start = lo;
  params.fit_end = hi;

  for (Index s = 0; s < S; ++s) {
    double mn = grid.values(s, t0);
    double mx = mn;
    for (Index t = t0; t < t1; ++t) {
      if (!grid.mask(s, t))
        throw InvalidArgument("fit_minmax: grid not fully imputed at station " +
                              grid.station_ids[static_cast<std::size_t>(s)] + ", " + to_string(grid.hour_at(t)));
      mn = std::min(mn, grid.values(s, t));
      mx = std::max(mx, grid.values(s, t));
    }
    params.min(s) = mn;
    params.max(s) = mx;
  }
  return params;
}

HourlyGrid apply_minmax(const HourlyGrid& grid, const NormalizationParams& params) {
  HourlyGrid out = grid;
  for (Index s = 0; s < grid.stations(); ++s) {
    const Index p = params.index_of(grid.station_ids[static_cast<std::size_t>(s)]);
    if (p < 0)
      throw InvalidArgument("apply_minmax: station '" + grid.station_ids[static_cast<std::size_t>(s)] +
                            "' missing from normalization params");
    const double mn = params.min(p);
    const double mx = params.max(p);
    const double span = mx - mn;
    if (span == 0.0)
      out.values.row(s).setZero();
    else
      out.values.row(s) = (grid.values.row(s).array() - mn) / span;
  }
  return out;
}

std::vector<RawRecord> records_from_grid(const HourlyGrid& grid) {
  std::vector<RawRecord> records;
  for (Index s = 0; s < grid.stations(); ++s) {
    for (Index t = 0; t < grid.hours(); ++t) {
      if (!grid.mask(s, t)) continue;
      RawRecord rec;
      rec.station_id = grid.station_ids[static_cast<std::size_t>(s)];
      rec.timestamp = grid.hour_at(t);
      rec.no2 = grid.values(s, t);
      rec.valid = true;
      records.push_back(std::move(rec));
    }
  }
  return records;
}

void save_grid(std::ostream& out, const HourlyGrid& grid) {
  for (const std::string& id : grid.station_ids)
    if (id.empty() || id.find(',') != std::string::npos || id.find('\n') != std::string::npos)
      throw InvalidArgument("save_grid: station id not representable in CSV: '" + id + "'");
  out << kGridMagic << ',' << kGridVersion << '\n';
  out << "stations";
  for (const std::string& id : grid.station_ids) out << ',' << id;
  out << '\n';
  out << "start," << to_string(grid.start) << '\n';
  out << "hours," << grid.hours() << '\n';
  for (Index t = 0; t < grid.hours(); ++t) {
    for (Index s = 0; s < grid.stations(); ++s) {
      if (s > 0) out << ',';
      if (grid.mask(s, t)) out << format_double(grid.values(s, t));
    }
    out << '\n';
  }
}

void save_grid(const std::string& path, const HourlyGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  save_grid(out, grid);
  if (!out) throw ParseError("write failed: " + path);
}

HourlyGrid load_grid(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line)) throw ParseError(std::string("grid file: missing ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  {
    const std::vector<std::string> magic = split_line(next_line("header"));
    if (magic.size() != 2 || magic[0] != kGridMagic)
      throw ParseError("not a grid file");
    if (magic[1] != std::to_string(kGridVersion))
      throw ParseError("unsupported grid file version: " + magic[1]);
  }

  HourlyGrid grid;
  {
    const std::vector<std::string> fields = split_line(next_line("station list"));
    if (fields.empty() || fields[0] != "stations" || fields.size() < 2)
      throw ParseError("grid file: bad station list");
    grid.station_ids.assign(fields.begin() + 1, fields.end());
  }
  {
    const std::vector<std::string> fields = split_line(next_line("start hour"));
    if (fields.size() != 2 || fields[0] != "start") throw ParseError("grid file: bad start line");
    grid.start = parse_hour(fields[1]);
  }
  Index T = 0;
  {
    const std::vector<std::string> fields = split_line(next_line("hour count"));
    if (fields.size() != 2 || fields[0] != "hours") throw ParseError("grid file: bad hours line");
    T = static_cast<Index>(parse_double_strict(fields[1], "grid file hours"));
    if (T <= 0) throw ParseError("grid file: hour count must be positive");
  }

  const Index S = static_cast<Index>(grid.station_ids.size());
  grid.values = Matrix::Zero(S, T);
  grid.mask = BoolGrid::Constant(S, T, false);
  for (Index t = 0; t < T; ++t) {
    const std::string row = next_line("data row");
    const std::vector<std::string> fields = split_line(row);
    if (static_cast<Index>(fields.size()) != S)
      throw ParseError("grid file: row " + std::to_string(t) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(S));
    for (Index s = 0; s < S; ++s) {
      const std::string& f = fields[static_cast<std::size_t>(s)];
      if (f.empty()) continue;
      grid.values(s, t) = parse_double_strict(f, "grid file row " + std::to_string(t));
      grid.mask(s, t) = true;
    }
  }
  grid.validate();
  return grid;
}

HourlyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open grid file: " + path);
  return load_grid(in);
}

std::string normalization_to_json(const NormalizationParams& params) {
  nlohmann::json j;
  j["stations"] = params.station_ids;
  j["min"] = std::vector<double>(params.min.data(), params.min.data() + params.min.size());
  j["max"] = std::vector<double>(params.max.data(), params.max.data() + params.max.size());
  j["fit_start"] = to_string(params.fit_start);
  j["fit_end"] = to_string(params.fit_end);
  return j.dump(2);
}

void save_normalization(const std::string& path, const NormalizationParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << normalization_to_json(params) << '\n';
  if (!out) throw ParseError("write failed: " + path);
}

NormalizationParams normalization_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("normalization file: " + std::string(e.what()));
  }
  NormalizationParams params;
  try {
    params.station_ids = j.at("stations").get<std::vector<std::string>>();
    const auto mn = j.at("min").get<std::vector<double>>();
    const auto mx = j.at("max").get<std::vector<double>>();
    if (mn.size() != params.station_ids.size() || mx.size() != params.station_ids.size())
      throw ParseError("normalization file: array lengths disagree");
    params.min = Eigen::Map<const Vector>(mn.data(), static_cast<Index>(mn.size()));
    params.max = Eigen::Map<const Vector>(mx.data(), static_cast<Index>(mx.size()));
    params.fit_start = parse_hour(j.at("fit_start").get<std::string>());
    params.fit_end = parse_hour(j.at("fit_end").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("normalization file: " + std::string(e.what()));
  }
  return params;
}

NormalizationParams load_normalization(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open normalization file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return normalization_from_json(text);
}

}  // namespace aircast
