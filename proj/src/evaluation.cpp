#include "aircast/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace aircast {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace

std::int64_t ConfusionMatrix::correct() const {
  std::int64_t n = 0;
  for (int i = 0; i < kNumLevels; ++i)
    n += counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  return n;
}

double ConfusionMatrix::accuracy() const {
  return total == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(total);
}

ConfusionMatrix confusion_matrix(const std::vector<AlertLevel>& actual,
                                 const std::vector<AlertLevel>& predicted) {
  require(actual.size() == predicted.size(),
          "confusion_matrix: actual and predicted lengths disagree");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const int a = level_index(actual[i]);
    const int p = level_index(predicted[i]);
    ++cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
  }
  cm.total = static_cast<std::int64_t>(actual.size());
  return cm;
}

NormalizedConfusion normalize_rows(const ConfusionMatrix& cm) {
  NormalizedConfusion out{};
  constexpr std::size_t K = kNumLevels;
  for (std::size_t a = 0; a < K; ++a) {
    std::int64_t row = 0;
    for (std::size_t p = 0; p < K; ++p) row += cm.counts[a][p];
    if (row == 0) continue;
    for (std::size_t p = 0; p < K; ++p)
      out[a][p] = static_cast<double>(cm.counts[a][p]) / static_cast<double>(row);
  }
  return out;
}

ErrorTaxonomy error_taxonomy(const ConfusionMatrix& cm) {
  ErrorTaxonomy tax;
  tax.total = cm.total;
  std::int64_t adjacent = 0, non_adjacent = 0, fp = 0, fn = 0;
  for (int a = 0; a < kNumLevels; ++a) {
    std::int64_t row = 0, row_adj = 0, row_far = 0, row_hit = 0;
    for (int p = 0; p < kNumLevels; ++p) {
      const std::int64_t n = cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
      row += n;
      const int dist = std::abs(p - a);
      if (dist == 0) row_hit += n;
      else if (dist == 1) row_adj += n;
      else row_far += n;
      if (p > a) fp += n;
      if (p < a) fn += n;
    }
    adjacent += row_adj;
    non_adjacent += row_far;
    tax.class_count[static_cast<std::size_t>(a)] = row;
    if (row > 0) {
      const double d = static_cast<double>(row);
      tax.class_accuracy[static_cast<std::size_t>(a)] = static_cast<double>(row_hit) / d;
      tax.class_adjacent[static_cast<std::size_t>(a)] = static_cast<double>(row_adj) / d;
      tax.class_non_adjacent[static_cast<std::size_t>(a)] = static_cast<double>(row_far) / d;
    }
  }
  if (cm.total > 0) {
    const double d = static_cast<double>(cm.total);
    tax.adjacent = static_cast<double>(adjacent) / d;
    tax.non_adjacent = static_cast<double>(non_adjacent) / d;
    tax.false_positive = static_cast<double>(fp) / d;
    tax.false_negative = static_cast<double>(fn) / d;
  }
  return tax;
}

double TariffTable::charge(AlertLevel level) const {
  return static_cast<double>(block_hours) *
         price_per_hour[static_cast<std::size_t>(level_index(level))];
}

void TariffTable::validate() const {
  require(block_hours >= 1, "tariff: block_hours must be at least 1");
  for (std::size_t i = 0; i < price_per_hour.size(); ++i) {
    require(std::isfinite(price_per_hour[i]) && price_per_hour[i] > 0.0,
            "tariff: prices must be positive");
    if (i > 0)
      require(price_per_hour[i] > price_per_hour[i - 1],
              "tariff: prices must rise strictly with severity");
  }
}

EconomicReport economic_impact(const std::vector<AlertLevel>& actual,
                               const std::vector<AlertLevel>& predicted,
                               const TariffTable& tariff) {
  require(actual.size() == predicted.size(),
          "economic_impact: actual and predicted lengths disagree");
  tariff.validate();
  EconomicReport report;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double owed = tariff.charge(actual[i]);
    const double billed = tariff.charge(predicted[i]);
    report.actual_total += owed;
    report.predicted_total += billed;
    const double delta = billed - owed;
    if (delta > 0.0) report.overcharge += delta;
    else report.undercharge -= delta;
  }
  report.fairness_gap = report.overcharge + report.undercharge;
  return report;
}

namespace {

void write_confusion(const std::string& path, const ConfusionMatrix& cm, bool normalized) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << "actual";
  for (int p = 0; p < kNumLevels; ++p) out << ',' << to_string(level_from_index(p));
  out << '\n';
  const NormalizedConfusion norm = normalized ? normalize_rows(cm) : NormalizedConfusion{};
  char buf[32];
  for (int a = 0; a < kNumLevels; ++a) {
    out << to_string(level_from_index(a));
    for (int p = 0; p < kNumLevels; ++p) {
      if (normalized) {
        std::snprintf(buf, sizeof buf, "%.17g",
                      norm[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)]);
        out << ',' << buf;
      } else {
        out << ','
            << cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
      }
    }
    out << '\n';
  }
  if (!out) throw ParseError("write failed: " + path);
}

}  // namespace

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  write_confusion(path, cm, /*normalized=*/false);
}

void write_confusion_normalized_csv(const std::string& path, const ConfusionMatrix& cm) {
  write_confusion(path, cm, /*normalized=*/true);
}

}  // namespace aircast
