#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aircast/csv.hpp"
#include "aircast/hours.hpp"
#include "aircast/types.hpp"

namespace aircast {

// Station × hour matrix of NO₂ concentrations with a missing-value mask.
// The station order is canonical: every downstream module indexes stations
// by row position in this grid.
struct HourlyGrid {
  std::vector<std::string> station_ids;
  Hour start;
  Matrix values;   // S × T
  BoolGrid mask;   // S × T, true = observed

  Index stations() const { return values.rows(); }
  Index hours() const { return values.cols(); }
  Hour end() const { return start + hours(); }
  Hour hour_at(Index t) const { return start + t; }

  // Column for an hour, or -1 when outside the grid.
  Index index_of(Hour h) const {
    const std::int64_t offset = h - start;
    return (offset >= 0 && offset < hours()) ? static_cast<Index>(offset) : -1;
  }

  Index station_index(const std::string& id) const;

  void validate() const;
};

struct BuildResult {
  HourlyGrid grid;
  std::int64_t duplicates = 0;  // records overwritten by a later record for the same cell
};

// Assembles the grid over [start, end). Records for stations outside
// `stations` or hours outside the range are ignored. For duplicate
// (station, hour) records the last one wins.
BuildResult build_grid(const std::vector<RawRecord>& records, std::vector<std::string> stations,
                       Hour start, Hour end);

// Sorted unique station tokens appearing in the records.
std::vector<std::string> stations_in(const std::vector<RawRecord>& records);

// Fills masked-out cells with the station's observed mean for the same
// (calendar year, month); falls back to the station's observed annual mean,
// then to the grid-wide observed mean. Output mask is all-true; observed
// cells are unchanged. Throws when the grid has no observed cell at all.
HourlyGrid impute_monthly_mean(const HourlyGrid& grid);

struct NormalizationParams {
  std::vector<std::string> station_ids;
  Vector min;
  Vector max;
  Hour fit_start;
  Hour fit_end;

  Index index_of(const std::string& id) const;
};

// Per-station min/max over [start, end) ∩ grid range. The grid must be fully
// imputed within that range.
NormalizationParams fit_minmax(const HourlyGrid& grid, Hour start, Hour end);

// x → (x - min) / (max - min) per station; 0 when max = min. Values outside
// the fit range are not clipped. Every grid station must appear in params.
HourlyGrid apply_minmax(const HourlyGrid& grid, const NormalizationParams& params);

// Observed cells as records, station-major then chronological.
std::vector<RawRecord> records_from_grid(const HourlyGrid& grid);

// Columnar text format: header (version, station list, start hour, hour
// count), then one CSV row per hour with an empty field for missing cells.
void save_grid(std::ostream& out, const HourlyGrid& grid);
void save_grid(const std::string& path, const HourlyGrid& grid);
HourlyGrid load_grid(std::istream& in);
HourlyGrid load_grid(const std::string& path);

void save_normalization(const std::string& path, const NormalizationParams& params);
NormalizationParams load_normalization(const std::string& path);
std::string normalization_to_json(const NormalizationParams& params);
NormalizationParams normalization_from_json(const std::string& text);

}  // namespace aircast
