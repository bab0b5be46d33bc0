#include "aircast/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "aircast/rng.hpp"

namespace aircast {

WindowResult make_windows(const HourlyGrid& grid, const std::vector<BlockLabel>& labels,
                          Index window_hours) {
  if (window_hours < 1) throw InvalidArgument("make_windows: window length must be >= 1");
  const Index S = grid.stations();
  WindowResult result;
  for (const BlockLabel& label : labels) {
    const Hour block_start = label.day.block_start(label.block);
    const Hour window_start = block_start - window_hours;
    if (window_start < grid.start || !(block_start <= grid.end())) {
      ++result.dropped;
      continue;
    }
    const Index t0 = grid.index_of(window_start);
    Sample sample;
    sample.window.resize(window_hours, S);
    for (Index r = 0; r < window_hours; ++r)
      for (Index s = 0; s < S; ++s) sample.window(r, s) = grid.values(s, t0 + r);
    sample.label = label.level;
    sample.day = label.day;
    sample.block = label.block;
    result.samples.push_back(std::move(sample));
  }
  return result;
}

void SplitSpec::validate() const {
  for (const YearRange& r : {train, validation, test})
    if (r.first > r.last) throw InvalidArgument("split: year range with first > last");
  if (!(train.last < validation.first && validation.last < test.first))
    throw InvalidArgument("split: ranges must be disjoint and chronological (train < validation < test)");
}

SplitResult split_by_year(const std::vector<Sample>& samples, const SplitSpec& spec) {
  spec.validate();
  SplitResult result;
  for (const Sample& sample : samples) {
    const int year = sample.day.year();
    if (spec.train.contains(year))
      result.train.push_back(sample);
    else if (spec.validation.contains(year))
      result.validation.push_back(sample);
    else if (spec.test.contains(year))
      result.test.push_back(sample);
  }
  if (result.train.empty()) throw InvalidArgument("split: train split is empty");
  if (result.validation.empty()) throw InvalidArgument("split: validation split is empty");
  if (result.test.empty()) throw InvalidArgument("split: test split is empty");
  return result;
}

BalancedDataset balance(const std::vector<Sample>& train, std::uint64_t seed) {
  BalancedDataset result;
  result.seed = seed;

  std::array<std::vector<std::size_t>, kNumLevels> members;
  for (std::size_t i = 0; i < train.size(); ++i)
    members[static_cast<std::size_t>(level_index(train[i].label))].push_back(i);

  int distinct = 0;
  std::int64_t majority = 0;
  for (int c = 0; c < kNumLevels; ++c) {
    const auto count = static_cast<std::int64_t>(members[static_cast<std::size_t>(c)].size());
    result.before[static_cast<std::size_t>(c)] = count;
    if (count > 0) ++distinct;
    majority = std::max(majority, count);
  }
  if (distinct < 2) throw InvalidArgument("balance: need at least two distinct classes");

  result.samples = train;
  Rng rng(mix_seed({seed, 0x62616c616e636540ULL}));
  for (int c = 0; c < kNumLevels; ++c) {
    const std::vector<std::size_t>& pool = members[static_cast<std::size_t>(c)];
    const auto count = static_cast<std::int64_t>(pool.size());
    if (count == 0) {
      result.after[static_cast<std::size_t>(c)] = 0;
      continue;
    }
    for (std::int64_t i = count; i < majority; ++i) {
      const std::int64_t pick = rng.uniform_int(0, count - 1);
      result.samples.push_back(train[pool[static_cast<std::size_t>(pick)]]);
    }
    result.after[static_cast<std::size_t>(c)] = majority;
  }
  return result;
}

namespace {

constexpr char kDatasetMagic[6] = {'A', 'C', 'D', 'S', 'E', 'T'};
constexpr std::uint16_t kDatasetVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
void read_raw(std::istream& in, T& value, const char* what) {
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw ParseError(std::string("truncated dataset file: ") + what);
}

}  // namespace

void save_dataset(const std::string& path, const std::vector<Sample>& samples, Index window_hours,
                  std::uint64_t seed) {
  const Index S = samples.empty() ? 0 : samples.front().window.cols();
  for (const Sample& sample : samples)
    if (sample.window.rows() != window_hours || sample.window.cols() != S)
      throw InvalidArgument("save_dataset: inconsistent window shapes");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out.write(kDatasetMagic, sizeof kDatasetMagic);
  write_raw(out, kDatasetVersion);
  write_raw(out, static_cast<std::int64_t>(window_hours));
  write_raw(out, static_cast<std::int64_t>(S));
  write_raw(out, static_cast<std::int64_t>(samples.size()));
  write_raw(out, seed);
  for (const Sample& sample : samples) {
    write_raw(out, static_cast<std::int64_t>(sample.day.count()));
    write_raw(out, static_cast<std::int32_t>(sample.block));
    write_raw(out, static_cast<std::int32_t>(level_index(sample.label)));
    for (Index r = 0; r < window_hours; ++r)
      for (Index s = 0; s < S; ++s) write_raw(out, sample.window(r, s));
  }
  if (!out) throw ParseError("write failed: " + path);
}

DatasetFile load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset file: " + path);

  char magic[sizeof kDatasetMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDatasetMagic, sizeof magic) != 0)
    throw ParseError("not a dataset file: " + path);
  std::uint16_t version = 0;
  read_raw(in, version, "version");
  if (version != kDatasetVersion)
    throw ParseError("unsupported dataset version: " + std::to_string(version));

  DatasetFile file;
  std::int64_t window_hours = 0;
  std::int64_t stations = 0;
  std::int64_t count = 0;
  read_raw(in, window_hours, "window length");
  read_raw(in, stations, "station count");
  read_raw(in, count, "sample count");
  read_raw(in, file.seed, "seed");
  if (window_hours < 1 || stations < 0 || count < 0)
    throw ParseError("dataset file: nonsensical header");
  file.window_hours = static_cast<Index>(window_hours);
  file.stations = static_cast<Index>(stations);

  file.samples.resize(static_cast<std::size_t>(count));
  for (Sample& sample : file.samples) {
    std::int64_t day = 0;
    std::int32_t block = 0;
    std::int32_t label = 0;
    read_raw(in, day, "sample day");
    read_raw(in, block, "sample block");
    read_raw(in, label, "sample label");
    sample.day = Day(day);
    sample.block = block_from_index(block);
    sample.label = level_from_index(label);
    sample.window.resize(file.window_hours, file.stations);
    for (Index r = 0; r < file.window_hours; ++r)
      for (Index s = 0; s < file.stations; ++s) read_raw(in, sample.window(r, s), "sample values");
  }
  return file;
}

}  // namespace aircast
