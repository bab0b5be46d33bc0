#include "aircast/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace aircast {

RuleSpec RuleSpec::rule(int id) {
  RuleSpec spec;
  spec.id = id;
  if (id == 1)
    spec.percentiles = {75, 90, 95};
  else if (id == 2)
    spec.percentiles = {50, 75, 95};
  else
    throw InvalidArgument("rule id must be 1 or 2, got " + std::to_string(id));
  return spec;
}

int RuleSpec::percentile_for(AlertLevel level) const {
  const int i = level_index(level);
  if (i < 1) throw InvalidArgument("no percentile is associated with the no-alert level");
  return percentiles[static_cast<std::size_t>(i - 1)];
}

void RuleSpec::validate() const {
  if (id != 1 && id != 2) throw InvalidArgument("rule id must be 1 or 2");
  if (!(percentiles[0] < percentiles[1] && percentiles[1] < percentiles[2]))
    throw InvalidArgument("rule percentiles must be strictly increasing");
  for (int p : percentiles)
    if (p <= 0 || p >= 100) throw InvalidArgument("rule percentiles must lie in (0, 100)");
  if (min_stations < 1) throw InvalidArgument("rule min_stations must be >= 1");
  if (run_hours < 1 || run_hours > kBlockHours)
    throw InvalidArgument("rule run_hours must lie in [1, " + std::to_string(kBlockHours) + "]");
}

double annual_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("annual_percentile: empty value list");
  if (!(p > 0.0 && p < 100.0)) throw InvalidArgument("annual_percentile: p must lie in (0, 100)");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  // p·n first, then divide: computing p/100 first can round up across an
  // integer boundary (e.g. 0.9·10 → 9.000000000000002) and shift the rank.
  auto rank = static_cast<std::int64_t>(std::ceil((p * n) / 100.0));
  rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(values.size()));
  return values[static_cast<std::size_t>(rank - 1)];
}

void ThresholdTable::set(Index station, int year, int percentile, double threshold) {
  entries_[Key{station, year, percentile}] = threshold;
}

double ThresholdTable::at(Index station, int year, int percentile) const {
  const auto it = entries_.find(Key{station, year, percentile});
  if (it == entries_.end())
    throw InvalidArgument("no threshold for station " + std::to_string(station) + ", year " +
                          std::to_string(year) + ", percentile " + std::to_string(percentile));
  return it->second;
}

bool ThresholdTable::contains(Index station, int year, int percentile) const {
  return entries_.count(Key{station, year, percentile}) > 0;
}

ThresholdTable compute_thresholds(const HourlyGrid& grid, const RuleSpec& rule) {
  rule.validate();
  const Index S = grid.stations();
  const Index T = grid.hours();
  if (S == 0 || T == 0) throw InvalidArgument("compute_thresholds: empty grid");

  std::vector<int> year_of(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) year_of[static_cast<std::size_t>(t)] = grid.hour_at(t).year();

  ThresholdTable table;
  for (Index s = 0; s < S; ++s) {
    std::map<int, std::vector<double>> by_year;
    for (Index t = 0; t < T; ++t) {
      if (!grid.mask(s, t))
        throw InvalidArgument("compute_thresholds: grid not fully imputed at station " +
                              std::to_string(s) + ", " + to_string(grid.hour_at(t)));
      by_year[year_of[static_cast<std::size_t>(t)]].push_back(grid.values(s, t));
    }
    for (const auto& [year, values] : by_year) {
      if (values.empty())
        throw InvalidArgument("compute_thresholds: station-year with zero hours");
      for (int p : rule.percentiles)
        table.set(s, year, p, annual_percentile(values, static_cast<double>(p)));
    }
  }
  return table;
}

AlertLevel block_alert_level(const HourlyGrid& grid, const ThresholdTable& thresholds,
                             const RuleSpec& rule, Day day, Block block) {
  rule.validate();
  const Hour block_start = day.block_start(block);
  const Index t0 = grid.index_of(block_start);
  if (t0 < 0 || t0 + kBlockHours > grid.hours())
    throw InvalidArgument("block_alert_level: grid does not cover " + day.iso() + " block " +
                          std::to_string(static_cast<int>(block)));
  const int year = day.year();
  const Index S = grid.stations();

  for (int sev = level_index(AlertLevel::Alert); sev >= level_index(AlertLevel::PreWarning); --sev) {
    const AlertLevel level = level_from_index(sev);
    const int pct = rule.percentile_for(level);

    BoolGrid exceeds(S, kBlockHours);
    for (Index s = 0; s < S; ++s) {
      const double threshold = thresholds.at(s, year, pct);
      for (Index k = 0; k < kBlockHours; ++k)
        exceeds(s, k) = grid.values(s, t0 + k) > threshold;
    }

    for (Index r = 0; r + rule.run_hours <= kBlockHours; ++r) {
      if (rule.same_stations) {
        Index count = 0;
        for (Index s = 0; s < S; ++s) {
          bool all = true;
          for (Index k = r; k < r + rule.run_hours; ++k) all = all && exceeds(s, k);
          if (all) ++count;
        }
        if (count >= rule.min_stations) return level;
      } else {
        bool every_hour = true;
        for (Index k = r; k < r + rule.run_hours; ++k) {
          Index count = 0;
          for (Index s = 0; s < S; ++s)
            if (exceeds(s, k)) ++count;
          if (count < rule.min_stations) {
            every_hour = false;
            break;
          }
        }
        if (every_hour) return level;
      }
    }
  }
  return AlertLevel::NoAlert;
}

std::vector<BlockLabel> label_dataset(const HourlyGrid& grid, const RuleSpec& rule,
                                      const std::vector<Block>& blocks) {
  std::vector<Block> wanted = blocks;
  std::sort(wanted.begin(), wanted.end(),
            [](Block a, Block b) { return static_cast<int>(a) < static_cast<int>(b); });
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  std::vector<BlockLabel> labels;
  if (wanted.empty() || grid.hours() == 0) return labels;

  const ThresholdTable thresholds = compute_thresholds(grid, rule);
  const Day first = day_of(grid.start);
  const Day last = day_of(grid.end() - 1);
  for (Day d = first; d <= last; ++d) {
    for (Block b : wanted) {
      const Hour bs = d.block_start(b);
      if (bs < grid.start || !(bs + kBlockHours <= grid.end())) continue;
      labels.push_back({d, b, block_alert_level(grid, thresholds, rule, d, b)});
    }
  }
  return labels;
}

void save_labels(std::ostream& out, const std::vector<BlockLabel>& labels, int rule_id) {
  out << "date,block,rule,level\n";
  for (const BlockLabel& label : labels)
    out << label.day.iso() << ',' << static_cast<int>(label.block) << ',' << rule_id << ','
        << level_index(label.level) << '\n';
}

void save_labels(const std::string& path, const std::vector<BlockLabel>& labels, int rule_id) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  save_labels(out, labels, rule_id);
  if (!out) throw ParseError("write failed: " + path);
}

namespace {

int parse_int_token(const std::string& field, const std::string& context, int lo, int hi) {
  int value = 0;
  const char* first = field.data();
  auto [ptr, ec] = std::from_chars(first, first + field.size(), value);
  if (ec != std::errc() || ptr != first + field.size() || value < lo || value > hi)
    throw ParseError(context + ": bad value '" + field + "'");
  return value;
}

}  // namespace

LabelFile load_labels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("label file: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,block,rule,level") throw ParseError("label file: unexpected header '" + line + "'");

  LabelFile file;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
      const std::size_t comma = line.find(',', begin);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(begin));
        break;
      }
      fields.push_back(line.substr(begin, comma - begin));
      begin = comma + 1;
    }
    const std::string context = "label file line " + std::to_string(line_no);
    if (fields.size() != 4) throw ParseError(context + ": expected 4 fields");
    BlockLabel label;
    label.day = parse_day(fields[0]);
    label.block = block_from_index(parse_int_token(fields[1], context, 1, 4));
    const int rule_id = parse_int_token(fields[2], context, 1, 2);
    label.level = level_from_index(parse_int_token(fields[3], context, 0, 3));
    if (file.labels.empty())
      file.rule_id = rule_id;
    else if (rule_id != file.rule_id)
      throw ParseError(context + ": mixed rule ids in one label file");
    file.labels.push_back(label);
  }
  if (file.labels.empty()) throw ParseError("label file: no label rows");
  return file;
}

LabelFile load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open label file: " + path);
  return load_labels(in);
}

}  // namespace aircast
