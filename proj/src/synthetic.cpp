#include "aircast/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "aircast/rng.hpp"

namespace aircast {

namespace {

constexpr std::uint64_t kLevelTag = 0x6c6576656c730000ULL;
constexpr std::uint64_t kEpisodeTag = 0x657069736f646500ULL;
constexpr std::uint64_t kBandTag = 0x62616e6473000000ULL;
constexpr Index kPrecursorHours = 3;

double band_value(int percentile) {
  switch (percentile) {
    case 50: return 10.0;
    case 75: return 20.0;
    case 90: return 30.0;
    case 95: return 40.0;
  }
  throw InvalidArgument("generate_synthetic: only percentiles {50,75,90,95} are supported, got " +
                        std::to_string(percentile));
}

std::int64_t ceil_rank(int percentile, std::int64_t n) {
  return (static_cast<std::int64_t>(percentile) * n + 99) / 100;
}

std::string station_name(Index s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", static_cast<int>(s));
  return buf;
}

struct Placement {
  std::int64_t day_offset;
  Block block;
  AlertLevel level;
  Index first_column;
  std::vector<Index> stations;
  double value;
};

}  // namespace

void SynthSpec::validate() const {
  rule.validate();
  if (stations < rule.min_stations)
    throw InvalidArgument("generate_synthetic: need at least " + std::to_string(rule.min_stations) +
                          " stations");
  if (signal && stations < rule.min_stations + 2)
    throw InvalidArgument("generate_synthetic: signal mode needs " +
                          std::to_string(rule.min_stations + 2) +
                          " stations (2 signal carriers plus the injectable set)");
  if (days < 2) throw InvalidArgument("generate_synthetic: need at least 2 days");
  for (double w : level_weights)
    if (!(w >= 0.0)) throw InvalidArgument("generate_synthetic: level weights must be non-negative");
  std::map<std::pair<std::int64_t, int>, int> seen;
  for (const EpisodeSpec& ep : episodes) {
    if (ep.day_offset < 0 || ep.day_offset >= days)
      throw InvalidArgument("generate_synthetic: episode day offset out of range");
    if (ep.block != Block::II && ep.block != Block::III)
      throw InvalidArgument("generate_synthetic: episodes are only placed in blocks II and III");
    if (++seen[{ep.day_offset, static_cast<int>(ep.block)}] > 1)
      throw InvalidArgument("generate_synthetic: duplicate episode for one (day, block)");
  }
}

SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const Index S = spec.stations;
  const Index T = static_cast<Index>(spec.days * 24);
  const Hour start = year_start(spec.start_year);
  const Day first_day = day_of(start);

  // Chosen level per (day offset, block II/III).
  std::map<std::pair<std::int64_t, int>, AlertLevel> chosen;
  for (const EpisodeSpec& ep : spec.episodes)
    chosen[{ep.day_offset, static_cast<int>(ep.block)}] = ep.level;

  double weight_total = 0.0;
  for (double w : spec.level_weights) weight_total += w;
  if (weight_total > 0.0) {
    Rng level_rng(mix_seed({spec.seed, kLevelTag}));
    for (std::int64_t d = 0; d < spec.days; ++d) {
      for (Block block : {Block::II, Block::III}) {
        const auto key = std::make_pair(d, static_cast<int>(block));
        if (chosen.count(key)) continue;
        const double u = level_rng.uniform() * weight_total;
        double cum = 0.0;
        int pick = kNumLevels - 1;
        for (int c = 0; c < kNumLevels; ++c) {
          cum += spec.level_weights[static_cast<std::size_t>(c)];
          if (u < cum) {
            pick = c;
            break;
          }
        }
        chosen[key] = level_from_index(pick);
      }
    }
  }

  // Episode placements: seeded hour offset and station triple.
  std::vector<Index> injectable;
  for (Index s = spec.signal ? 2 : 0; s < S; ++s) injectable.push_back(s);

  std::vector<Placement> placements;
  for (const auto& [key, level] : chosen) {
    if (level == AlertLevel::NoAlert) continue;
    const auto [d, block_id] = key;
    const Block block = block_from_index(block_id);
    Rng ep_rng(mix_seed({spec.seed, kEpisodeTag, static_cast<std::uint64_t>(d),
                         static_cast<std::uint64_t>(block_id)}));
    Placement p;
    p.day_offset = d;
    p.block = block;
    p.level = level;
    const std::int64_t offset = ep_rng.uniform_int(0, kBlockHours - spec.rule.run_hours);
    p.first_column = static_cast<Index>(d * 24 + block_start_hour(block) + offset);
    for (std::int64_t i : ep_rng.sample_without_replacement(
             static_cast<std::int64_t>(injectable.size()), spec.rule.min_stations))
      p.stations.push_back(injectable[static_cast<std::size_t>(i)]);
    p.value = band_value(spec.rule.percentile_for(level)) + 5.0;
    placements.push_back(std::move(p));
  }

  SynthResult result;
  result.grid.station_ids.reserve(static_cast<std::size_t>(S));
  for (Index s = 0; s < S; ++s) result.grid.station_ids.push_back(station_name(s));
  result.grid.start = start;
  result.grid.values = Matrix::Constant(S, T, 10.0);
  result.grid.mask = BoolGrid::Constant(S, T, true);

  BoolGrid injected = BoolGrid::Constant(S, T, false);
  // Injected cell count per (station, year, value band).
  std::map<std::tuple<Index, int, int>, std::int64_t> injected_counts;
  for (const Placement& p : placements) {
    const int year = (first_day + p.day_offset).year();
    for (Index s : p.stations) {
      for (Index k = 0; k < spec.rule.run_hours; ++k) {
        const Index t = p.first_column + k;
        result.grid.values(s, t) = p.value;
        injected(s, t) = true;
        ++injected_counts[{s, year, static_cast<int>(p.value)}];
      }
    }
  }

  // Precursor pattern on the signal stations.
  if (spec.signal) {
    for (const auto& [key, level] : chosen) {
      if (level == AlertLevel::NoAlert) continue;
      const auto& [d, block_id] = key;
      const Index bs = static_cast<Index>(d * 24 + block_start_hour(block_from_index(block_id)));
      const double value = 60.0 + 20.0 * level_index(level);
      for (Index k = bs - kPrecursorHours; k < bs; ++k) {
        result.grid.values(0, k) = value;
        result.grid.values(1, k) = value;
      }
    }
  }

  // Banded baseline per (eligible station, year): exact percentile placement.
  // Columns of each calendar year within the grid.
  std::map<int, std::pair<Index, Index>> year_columns;  // year → [lo, hi)
  for (Index t = 0; t < T; t += 24) {
    const int year = (first_day + t / 24).year();
    auto [it, inserted] = year_columns.emplace(year, std::make_pair(t, t + 24));
    if (!inserted) it->second.second = t + 24;
  }

  const Index first_band_station = spec.signal ? 2 : 0;
  for (Index s = first_band_station; s < S; ++s) {
    for (const auto& [year, cols] : year_columns) {
      const auto [t_lo, t_hi] = cols;
      const std::int64_t n = t_hi - t_lo;
      const std::int64_t r50 = ceil_rank(50, n);
      const std::int64_t r75 = ceil_rank(75, n);
      const std::int64_t r90 = ceil_rank(90, n);
      const std::int64_t r95 = ceil_rank(95, n);

      auto injected_of = [&](int value) {
        const auto it = injected_counts.find({s, year, value});
        return it == injected_counts.end() ? std::int64_t{0} : it->second;
      };
      const std::int64_t i15 = injected_of(15);
      const std::int64_t i25 = injected_of(25);
      const std::int64_t i35 = injected_of(35);
      const std::int64_t i45 = injected_of(45);

      auto infeasible = [&](const char* band, std::int64_t have, std::int64_t cap) {
        throw InvalidArgument("generate_synthetic: infeasible injection: station " + station_name(s) +
                              ", year " + std::to_string(year) + " needs " + std::to_string(have) +
                              " cells in band " + band + " but only " + std::to_string(cap) +
                              " fit; use more days or fewer episodes");
      };
      if (i15 > r75 - r50 - 1) infeasible("15", i15, r75 - r50 - 1);
      if (i25 > r90 - r75 - 1) infeasible("25", i25, r90 - r75 - 1);
      if (i35 > r95 - r90 - 1) infeasible("35", i35, r95 - r90 - 1);
      if (i45 > n - r95) infeasible("45", i45, n - r95);

      const std::int64_t b20 = r75 - r50 - i15;
      const std::int64_t b30 = r90 - r75 - i25;
      const std::int64_t b40 = n - r90 - i35 - i45;

      std::vector<Index> slots;  // odd global offsets, not injected
      for (Index t = t_lo; t < t_hi; ++t)
        if ((t % 2) == 1 && !injected(s, t)) slots.push_back(t);
      const auto need = b20 + b30 + b40;
      if (static_cast<std::int64_t>(slots.size()) < need)
        throw InvalidArgument("generate_synthetic: internal error: band slots exhausted");

      std::vector<double> fill(slots.size(), 10.0);
      std::size_t pos = 0;
      for (std::int64_t i = 0; i < b20; ++i) fill[pos++] = 20.0;
      for (std::int64_t i = 0; i < b30; ++i) fill[pos++] = 30.0;
      for (std::int64_t i = 0; i < b40; ++i) fill[pos++] = 40.0;
      Rng band_rng(mix_seed({spec.seed, kBandTag, static_cast<std::uint64_t>(s),
                             static_cast<std::uint64_t>(year)}));
      band_rng.shuffle(fill);
      for (std::size_t i = 0; i < slots.size(); ++i)
        result.grid.values(s, slots[i]) = fill[i];
    }
  }

  // Intended labels for every block of every day.
  for (std::int64_t d = 0; d < spec.days; ++d) {
    for (int b = 1; b <= 4; ++b) {
      BlockLabel label;
      label.day = first_day + d;
      label.block = block_from_index(b);
      const auto it = chosen.find({d, b});
      label.level = it == chosen.end() ? AlertLevel::NoAlert : it->second;
      result.intended.push_back(label);
    }
  }
  return result;
}

}  // namespace aircast
