#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aircast/dataset.hpp"
#include "aircast/grid.hpp"
#include "aircast/labeling.hpp"
#include "aircast/models.hpp"

namespace aircast {

struct TrainConfig {
  Index max_epochs = 100;
  Index batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Index patience = 10;  // epochs without validation improvement; 0 disables
  std::uint64_t seed = 1;
  // When >= 0, training stops as soon as the epoch's train accuracy (dropout
  // off) reaches this value, keeping the current weights instead of the
  // best-validation snapshot. Used to certify memorization capacity.
  double target_train_accuracy = -1.0;

  void validate() const;  // throws InvalidArgument
};

struct EpochStats {
  Index epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double train_accuracy = -1.0;  // filled only when a target is set
};

struct TrainResult {
  std::vector<EpochStats> history;
  Index best_epoch = 0;  // 1-based epoch whose weights the model ends with
  bool stopped_early = false;
  bool reached_target = false;
};

// Adam on mean batch cross-entropy. Shuffling and dropout are re-seeded per
// epoch from (seed, epoch), so a run is a pure function of (model, data,
// config). max_epochs = 0 leaves the model untouched. Unless the accuracy
// target fired, the weights of the best-validation epoch are restored at the
// end. Throws NumericError when a batch loss goes non-finite.
TrainResult train_model(Model& model, const std::vector<Sample>& train,
                        const std::vector<Sample>& validation, const TrainConfig& config);

struct EvalStats {
  double mean_loss = 0.0;
  double accuracy = 0.0;
  std::vector<AlertLevel> predictions;  // aligned with the input samples
};

// Forward passes with dropout off, batched to bound tape growth.
EvalStats evaluate_model(const Model& model, const std::vector<Sample>& samples);

// CSV: epoch,train_loss,val_loss,val_acc
void save_history(const std::string& path, const std::vector<EpochStats>& history);

// Everything inference on new data needs: architecture + weights, the rule
// that produced the labels, the normalization fitted on train years, and the
// block the model predicts.
struct Checkpoint {
  ModelSpec model;
  std::vector<std::pair<std::string, Tensor>> parameters;
  RuleSpec rule;
  NormalizationParams normalization;
  Block block = Block::II;
  std::uint64_t seed = 0;
};

Checkpoint make_checkpoint(const Model& model, const RuleSpec& rule,
                           const NormalizationParams& normalization, Block block,
                           std::uint64_t seed);

// Sectioned binary container (magic, version, named length-prefixed
// sections); parameter payloads are raw 64-bit reals, so weights round-trip
// bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the architecture from the stored spec and overwrites every
// parameter with the stored values.
Model restore_model(const Checkpoint& ckpt);

}  // namespace aircast
