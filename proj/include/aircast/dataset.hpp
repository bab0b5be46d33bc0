#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aircast/grid.hpp"
#include "aircast/labeling.hpp"
#include "aircast/types.hpp"

namespace aircast {

// One training example: the L hours immediately preceding the block start
// (rows, oldest first) across all S stations (columns), plus the block label.
struct Sample {
  Matrix window;  // L × S
  AlertLevel label = AlertLevel::NoAlert;
  Day day;
  Block block = Block::II;
};

struct WindowResult {
  std::vector<Sample> samples;
  std::int64_t dropped = 0;  // labels lacking full window coverage
};

// Windows end exactly at the block start: block II of day d uses
// [06:00-L, 06:00), block III uses [12:00-L, 12:00).
WindowResult make_windows(const HourlyGrid& grid, const std::vector<BlockLabel>& labels,
                          Index window_hours);

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int year) const { return year >= first && year <= last; }
};

struct SplitSpec {
  YearRange train{2010, 2017};
  YearRange validation{2018, 2018};
  YearRange test{2019, 2019};
  void validate() const;  // ranges well-formed, disjoint, chronological
};

struct SplitResult {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

// Partition by the sample's calendar year. Samples outside every range are
// discarded. Throws when any split comes out empty.
SplitResult split_by_year(const std::vector<Sample>& samples, const SplitSpec& spec);

struct BalancedDataset {
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  std::array<std::int64_t, kNumLevels> before{};
  std::array<std::int64_t, kNumLevels> after{};
};

// Random oversampling with replacement up to the majority class count.
// Classes absent from the input stay absent. Requires at least two distinct
// classes. Deterministic given the seed.
BalancedDataset balance(const std::vector<Sample>& train, std::uint64_t seed);

// Binary container: magic, version, window length, station count, sample
// count, seed, then per sample (day, block, label, row-major window reals).
void save_dataset(const std::string& path, const std::vector<Sample>& samples, Index window_hours,
                  std::uint64_t seed);

struct DatasetFile {
  Index window_hours = 0;
  Index stations = 0;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
};
DatasetFile load_dataset(const std::string& path);

}  // namespace aircast
