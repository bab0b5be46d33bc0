#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "aircast/grid.hpp"
#include "aircast/hours.hpp"
#include "aircast/types.hpp"

namespace aircast {

// Percentile rule: severity s triggers when min_stations distinct stations
// all strictly exceed their own station-year percentile threshold at
// run_hours consecutive hours inside the block. Rule I uses percentiles
// (75, 90, 95), Rule II (50, 75, 95).
struct RuleSpec {
  int id = 1;
  std::array<int, 3> percentiles{75, 90, 95};  // pre-warning, warning, alert
  int min_stations = 3;
  int run_hours = 3;
  // Strict reading: the same stations must exceed at every hour of the run.
  // false switches to the weaker per-hour count, kept for sensitivity studies.
  bool same_stations = true;

  static RuleSpec rule(int id);

  std::string name() const { return id == 1 ? "RuleI" : "RuleII"; }
  int percentile_for(AlertLevel level) const;
  void validate() const;
};

// Nearest-rank percentile: sorted ascending, 1-indexed element at
// ceil(p/100 · n). p must lie in (0, 100); values must be non-empty.
double annual_percentile(std::vector<double> values, double p);

// (station index, calendar year, percentile) → threshold in µg/m³.
class ThresholdTable {
 public:
  void set(Index station, int year, int percentile, double threshold);
  double at(Index station, int year, int percentile) const;
  bool contains(Index station, int year, int percentile) const;

  using Key = std::tuple<Index, int, int>;
  const std::map<Key, double>& entries() const { return entries_; }

 private:
  std::map<Key, double> entries_;
};

// Thresholds over raw (pre-normalization) values, one per
// (station, calendar year in the grid, rule percentile).
ThresholdTable compute_thresholds(const HourlyGrid& grid, const RuleSpec& rule);

struct BlockLabel {
  Day day;
  Block block = Block::I;
  AlertLevel level = AlertLevel::NoAlert;
};

// Label of one (day, block). The grid must cover the block's six hours and
// the table must hold thresholds for every station in the block's year.
AlertLevel block_alert_level(const HourlyGrid& grid, const ThresholdTable& thresholds,
                             const RuleSpec& rule, Day day, Block block);

// One label per (day, requested block) fully covered by the grid,
// chronological. Thresholds are computed from the same grid.
std::vector<BlockLabel> label_dataset(const HourlyGrid& grid, const RuleSpec& rule,
                                      const std::vector<Block>& blocks);

// CSV export: header `date,block,rule,level`.
void save_labels(std::ostream& out, const std::vector<BlockLabel>& labels, int rule_id);
void save_labels(const std::string& path, const std::vector<BlockLabel>& labels, int rule_id);

struct LabelFile {
  int rule_id = 0;
  std::vector<BlockLabel> labels;
};
LabelFile load_labels(std::istream& in);
LabelFile load_labels(const std::string& path);

}  // namespace aircast
