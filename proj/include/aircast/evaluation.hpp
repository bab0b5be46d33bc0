#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aircast/types.hpp"

namespace aircast {

struct ConfusionMatrix {
  // counts[actual][predicted]
  std::array<std::array<std::int64_t, kNumLevels>, kNumLevels> counts{};
  std::int64_t total = 0;

  std::int64_t correct() const;
  double accuracy() const;  // 0 when empty
};

ConfusionMatrix confusion_matrix(const std::vector<AlertLevel>& actual,
                                 const std::vector<AlertLevel>& predicted);

// Each row divided by its sum, so rows with samples sum to 1; empty rows
// stay zero.
using NormalizedConfusion = std::array<std::array<double, kNumLevels>, kNumLevels>;
NormalizedConfusion normalize_rows(const ConfusionMatrix& cm);

// Severity structure of the mistakes. Adjacent means the predicted level is
// one step from the actual one, non-adjacent two or more. Per-class rates
// are fractions of that class's samples; the overall rates are fractions of
// all samples. A false positive predicts above the actual level, a false
// negative below.
struct ErrorTaxonomy {
  std::array<double, kNumLevels> class_accuracy{};
  std::array<double, kNumLevels> class_adjacent{};
  std::array<double, kNumLevels> class_non_adjacent{};
  std::array<std::int64_t, kNumLevels> class_count{};
  double adjacent = 0.0;
  double non_adjacent = 0.0;
  double false_positive = 0.0;
  double false_negative = 0.0;
  std::int64_t total = 0;
};

ErrorTaxonomy error_taxonomy(const ConfusionMatrix& cm);

// Euro parking charge for one six-hour block at each alert level. Charges
// must be strictly increasing in severity; equal charges would make distinct
// labelings economically indistinguishable.
struct TariffTable {
  int block_hours = kBlockHours;
  std::array<double, kNumLevels> price_per_hour{0.40, 0.60, 1.20, 2.40};

  double charge(AlertLevel level) const;
  void validate() const;
};

struct EconomicReport {
  double actual_total = 0.0;     // euros owed under the true labels
  double predicted_total = 0.0;  // euros billed under the predictions
  double overcharge = 0.0;       // sum of per-block amounts billed too high
  double undercharge = 0.0;      // sum of per-block amounts billed too low
  double fairness_gap = 0.0;     // overcharge + undercharge
};

EconomicReport economic_impact(const std::vector<AlertLevel>& actual,
                               const std::vector<AlertLevel>& predicted,
                               const TariffTable& tariff = {});

// CSV with one row per actual level: `actual,<level names...>`.
void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);
void write_confusion_normalized_csv(const std::string& path, const ConfusionMatrix& cm);

}  // namespace aircast
