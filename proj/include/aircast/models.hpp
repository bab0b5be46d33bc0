#pragma once

#include <map>
#include <string>
#include <vector>

#include "aircast/autodiff.hpp"
#include "aircast/types.hpp"

namespace aircast {

// Hyper-parameters for the three window classifiers. Only the fields of the
// selected architecture matter; the rest keep their defaults so a spec can be
// round-tripped through JSON without loss.
struct ModelSpec {
  std::string architecture = "cnn";  // "lstm" | "cnn" | "utime"
  Index window = 24;                 // input hours per sample
  Index stations = 0;                // input stations per hour
  Index classes = kNumLevels;

  // lstm
  Index lstm_units1 = 50;
  Index lstm_units2 = 10;

  // cnn
  Index conv1_filters = 16;
  Index conv1_kernel = 5;
  Index conv2_filters = 64;
  Index conv2_kernel = 3;
  Index dense_units = 20;

  // lstm + cnn head regularization
  double dropout_rate = 0.05;

  // utime: encoder widths (one per resolution level), shared kernel extent,
  // and the number of trailing window hours kept so the time axis halves
  // evenly through every pooling stage.
  std::vector<Index> utime_widths{16, 32, 64, 128, 256};
  Index utime_kernel = 5;
  Index utime_crop = 160;

  void validate() const;  // throws InvalidArgument
};

std::string model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const std::string& text);

// Shape facts derived from a spec without building parameters.
struct ModelInfo {
  Index parameter_count = 0;
  Index cnn_flatten = 0;         // units entering the first dense layer
  Index utime_input_values = 0;  // crop * stations
  Index utime_latent_time = 0;   // time extent after the bottleneck
};

ModelInfo model_info(const ModelSpec& spec);

struct Model {
  ModelSpec spec;
  std::vector<Parameter> params;

  Parameter& param(const std::string& id);
  const Parameter& param(const std::string& id) const;
  std::size_t param_ordinal(const std::string& id) const;
  Index parameter_count() const;
  void zero_grads();

  // Appends a parameter and indexes it by id; ids must be unique.
  void add(Parameter p);

 private:
  std::map<std::string, std::size_t> index_;
};

// Builds a model with Glorot-uniform weights drawn deterministically from
// seed. LSTM forget-gate biases start at 1, every other bias at 0.
Model build_model(const ModelSpec& spec, std::uint64_t seed);

// Parameter leaves registered on a tape, aligned with model.params.
struct TapeBinding {
  Tape* tape = nullptr;
  std::vector<Value> params;
};

TapeBinding bind_parameters(const Model& model, Tape& tape, bool needs_grad = true);

// Runs one window (rows = hours oldest first, cols = stations) through the
// bound model and returns the [1, classes] logits node.
Value model_forward(const Model& model, const TapeBinding& binding, const Matrix& window,
                    Rng& dropout_rng, bool training);

// x [T,F] → [T,H]. Gate pre-activations are x_t·wx + h·wh + b with columns
// ordered (input, forget, cell, output); h0 = c0 = 0.
// wx [F,4H], wh [H,4H], b [4H].
Value lstm_layer(Tape& t, Value x, Value wx, Value wh, Value b);

// Single-sample inference on a private tape, dropout off.
Vector predict_logits(const Model& model, const Matrix& window);
AlertLevel predict_level(const Model& model, const Matrix& window);
AlertLevel argmax_level(const Vector& logits);

}  // namespace aircast
