#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "aircast/grid.hpp"
#include "aircast/labeling.hpp"
#include "aircast/types.hpp"

namespace aircast {

struct EpisodeSpec {
  std::int64_t day_offset = 0;  // days from the grid's first day
  Block block = Block::II;
  AlertLevel level = AlertLevel::NoAlert;  // NoAlert = explicitly quiet block
};

// Generator of grids with controllable block labels. Per station-year the
// baseline is a banded population {10,20,30,40} whose nearest-rank
// percentiles (50,75,90,95) are exactly (10,20,30,40) by count construction.
// Values above 10 appear only at odd global hour offsets, so every run of 3
// consecutive hours contains an even hour where at most the two signal
// stations exceed anything; accidental triggers are impossible. Episodes
// write threshold+5 values at `rule.min_stations` seeded stations over
// `rule.run_hours` consecutive hours inside the chosen block, which makes
// the labeler reproduce exactly the intended level.
struct SynthSpec {
  Index stations = 12;
  std::int64_t days = 30;
  int start_year = 2015;
  std::uint64_t seed = 1;
  RuleSpec rule = RuleSpec::rule(1);
  // Adds a 2-station precursor pattern (stations 0 and 1, value 60+20·level,
  // the 3 hours before the block) so the label is predictable from the
  // window. Two stations can never satisfy the 3-station rule, so the
  // precursor never changes a label. Requires stations ≥ 5.
  bool signal = false;
  // When nonzero, blocks II/III without an explicit episode draw their level
  // from these weights.
  std::array<double, kNumLevels> level_weights{};
  std::vector<EpisodeSpec> episodes;

  void validate() const;
};

struct SynthResult {
  HourlyGrid grid;
  std::vector<BlockLabel> intended;  // all four blocks of every day, chronological
};

SynthResult generate_synthetic(const SynthSpec& spec);

}  // namespace aircast
