#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "aircast/dataset.hpp"
#include "aircast/evaluation.hpp"
#include "aircast/models.hpp"
#include "aircast/synthetic.hpp"
#include "aircast/train.hpp"

namespace aircast {

// Fixed artifact names inside the run's output directory.
namespace artifacts {
inline constexpr const char* kGrid = "grid.txt";
inline constexpr const char* kNormalization = "normalization.json";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kCheckpoint = "checkpoint.bin";
inline constexpr const char* kHistory = "history.csv";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kConfusion = "confusion.csv";
inline constexpr const char* kConfusionNormalized = "confusion_normalized.csv";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kSynthetic = "synthetic.csv";
inline constexpr const char* kTruthLabels = "truth_labels.csv";
}  // namespace artifacts

// One bag of knobs for every subcommand; each command reads the parts it
// needs. A JSON config file fills it first, CLI flags override afterwards.
struct RunConfig {
  std::string input;      // raw records CSV, or a saved grid for `label`
  std::string out = ".";  // output directory, created on demand
  std::string checkpoint;  // eval: defaults to <out>/checkpoint.bin
  int rule = 1;
  Block block = Block::II;
  Index window = 24;
  std::string model = "cnn";
  std::uint64_t seed = 1;
  SplitSpec split;
  TrainConfig train;
  TariffTable tariff;
  SynthSpec synth;

  std::string checkpoint_path() const;
};

RunConfig load_run_config(const std::string& path);

struct IngestSummary {
  Index stations = 0;
  Index hours = 0;
  std::int64_t records = 0;
  std::int64_t duplicates = 0;
  std::int64_t imputed = 0;
};

// CSV → imputed grid artifact. The grid spans whole civil days covering
// every record.
IngestSummary run_ingest(const RunConfig& cfg, std::ostream& log);

struct LabelSummary {
  std::int64_t labels = 0;
  std::array<std::int64_t, kNumLevels> by_level{};
};

// Labels blocks II and III of every fully covered day.
LabelSummary run_label(const RunConfig& cfg, std::ostream& log);

struct TrainSummary {
  Index epochs_run = 0;
  Index best_epoch = 0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Full pipeline: ingest, label cfg.block, fit normalization on the train
// years, window, split, balance, train, checkpoint, evaluate on test.
TrainSummary run_train(const RunConfig& cfg, std::ostream& log);

struct EvalSummary {
  std::int64_t samples = 0;
  double accuracy = 0.0;
  EconomicReport economy;
};

// Applies a checkpoint to new data and writes prediction artifacts.
EvalSummary run_eval(const RunConfig& cfg, std::ostream& log);

// Verifies model gradients against central differences on a small random
// batch. Returns false when the check fails.
bool run_gradcheck(const RunConfig& cfg, std::ostream& log);

struct SynthSummary {
  Index stations = 0;
  Index hours = 0;
  std::int64_t labels = 0;
};

SynthSummary run_synth(const RunConfig& cfg, std::ostream& log);

}  // namespace aircast
