#include "aircast/models.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "aircast/rng.hpp"

namespace aircast {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974ULL;  // "init"

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

double glorot_limit(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

enum class InitKind { Uniform, Zero, LstmBias };

struct ParamDef {
  std::string id;
  std::vector<Index> shape;
  InitKind kind = InitKind::Uniform;
  double limit = 0.0;
  Index units = 0;  // LstmBias: H, to place the forget-gate block
};

ParamDef glorot(std::string id, std::vector<Index> shape, Index fan_in, Index fan_out) {
  return {std::move(id), std::move(shape), InitKind::Uniform, glorot_limit(fan_in, fan_out), 0};
}

// He-style limit for relu layers: Glorot loses half the signal variance per
// relu, which starves the 22-conv U-Time stack; sqrt(6/fan_in) keeps the
// forward scale flat through arbitrary depth.
ParamDef he(std::string id, std::vector<Index> shape, Index fan_in) {
  return {std::move(id), std::move(shape), InitKind::Uniform,
          std::sqrt(6.0 / static_cast<double>(fan_in)), 0};
}

ParamDef zero(std::string id, std::vector<Index> shape) {
  return {std::move(id), std::move(shape), InitKind::Zero, 0.0, 0};
}

void lstm_defs(std::vector<ParamDef>& defs, const std::string& prefix, Index in, Index units) {
  defs.push_back(glorot(prefix + ".wx", {in, 4 * units}, in, units));
  defs.push_back(glorot(prefix + ".wh", {units, 4 * units}, units, units));
  defs.push_back({prefix + ".b", {4 * units}, InitKind::LstmBias, 0.0, units});
}

void conv1d_defs(std::vector<ParamDef>& defs, const std::string& prefix, Index out, Index in,
                 Index k) {
  defs.push_back(he(prefix + ".k", {out, in, k}, in * k));
  defs.push_back(zero(prefix + ".b", {out}));
}

Index utime_encoder_time(const ModelSpec& spec) {
  return spec.utime_crop >> spec.utime_widths.size();
}

Index utime_latent(const ModelSpec& spec) {
  return utime_encoder_time(spec) - spec.utime_kernel + 1;
}

// Spatial extents after the CNN's two conv+pool stages.
void cnn_pooled(const ModelSpec& spec, Index& h, Index& w) {
  h = spec.window / 2 / 2;
  w = spec.stations / 2 / 2;
}

std::vector<ParamDef> parameter_defs(const ModelSpec& spec) {
  std::vector<ParamDef> defs;
  if (spec.architecture == "lstm") {
    lstm_defs(defs, "lstm1", spec.stations, spec.lstm_units1);
    lstm_defs(defs, "lstm2", spec.lstm_units1, spec.lstm_units2);
    defs.push_back(glorot("head.w", {spec.lstm_units2, spec.classes}, spec.lstm_units2,
                          spec.classes));
    defs.push_back(zero("head.b", {spec.classes}));
  } else if (spec.architecture == "cnn") {
    const Index k1 = spec.conv1_kernel, k2 = spec.conv2_kernel;
    const Index f1 = spec.conv1_filters, f2 = spec.conv2_filters;
    defs.push_back(he("conv1.k", {f1, 1, k1, k1}, k1 * k1));
    defs.push_back(zero("conv1.b", {f1}));
    defs.push_back(he("conv2.k", {f2, f1, k2, k2}, f1 * k2 * k2));
    defs.push_back(zero("conv2.b", {f2}));
    Index h, w;
    cnn_pooled(spec, h, w);
    const Index flat = f2 * h * w;
    defs.push_back(he("fc1.w", {flat, spec.dense_units}, flat));
    defs.push_back(zero("fc1.b", {spec.dense_units}));
    defs.push_back(glorot("fc2.w", {spec.dense_units, spec.classes}, spec.dense_units,
                          spec.classes));
    defs.push_back(zero("fc2.b", {spec.classes}));
  } else {
    const auto& w = spec.utime_widths;
    const Index d = static_cast<Index>(w.size());
    const Index k = spec.utime_kernel;
    for (Index i = 0; i < d; ++i) {
      const std::string p = "enc" + std::to_string(i);
      const Index in = i ? w[static_cast<std::size_t>(i - 1)] : spec.stations;
      conv1d_defs(defs, p + ".conv1", w[static_cast<std::size_t>(i)], in, k);
      conv1d_defs(defs, p + ".conv2", w[static_cast<std::size_t>(i)],
                  w[static_cast<std::size_t>(i)], k);
    }
    const Index last = w.back();
    conv1d_defs(defs, "bottleneck", last, last, k);
    conv1d_defs(defs, "bridge", last, last, k);
    for (Index i = d - 1; i >= 0; --i) {
      const std::string p = "dec" + std::to_string(i);
      const Index wi = w[static_cast<std::size_t>(i)];
      const Index up = (i == d - 1) ? last : w[static_cast<std::size_t>(i + 1)];
      conv1d_defs(defs, p + ".conv1", wi, up + wi, k);
      conv1d_defs(defs, p + ".conv2", wi, wi, k);
    }
    defs.push_back(glorot("head.w", {w.front(), spec.classes}, w.front(), spec.classes));
    defs.push_back(zero("head.b", {spec.classes}));
  }
  return defs;
}

}  // namespace

void ModelSpec::validate() const {
  require(architecture == "lstm" || architecture == "cnn" || architecture == "utime",
          "unknown architecture: " + architecture);
  require(window >= 1, "window must be at least 1 hour");
  require(stations >= 1, "stations must be at least 1");
  require(classes >= 2, "classes must be at least 2");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0, 1)");
  if (architecture == "lstm") {
    require(lstm_units1 >= 1 && lstm_units2 >= 1, "lstm units must be at least 1");
  } else if (architecture == "cnn") {
    require(conv1_filters >= 1 && conv2_filters >= 1, "conv filters must be at least 1");
    require(conv1_kernel >= 1 && conv1_kernel % 2 == 1 && conv2_kernel >= 1 &&
                conv2_kernel % 2 == 1,
            "conv kernels must be odd");
    require(dense_units >= 1, "dense_units must be at least 1");
    require(window >= 4 && stations >= 4,
            "cnn needs window >= 4 and stations >= 4 for two pooling stages");
  } else {
    require(!utime_widths.empty(), "utime_widths must not be empty");
    for (Index wi : utime_widths) require(wi >= 1, "utime widths must be at least 1");
    require(utime_kernel >= 1 && utime_kernel % 2 == 1, "utime_kernel must be odd");
    require(utime_crop >= 1 && utime_crop <= window, "utime_crop must lie in [1, window]");
    const Index d = static_cast<Index>(utime_widths.size());
    require(utime_crop % (Index{1} << d) == 0,
            "utime_crop must be divisible by 2^depth so pooling stays exact");
    const Index t_enc = utime_crop >> d;
    require(t_enc >= utime_kernel, "utime_crop too small: bottleneck kernel does not fit");
    const Index latent = t_enc - utime_kernel + 1;
    require(t_enc % latent == 0,
            "utime geometry: encoder output time must be a multiple of the latent time");
  }
}

std::string model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["architecture"] = spec.architecture;
  j["window"] = spec.window;
  j["stations"] = spec.stations;
  j["classes"] = spec.classes;
  j["lstm_units1"] = spec.lstm_units1;
  j["lstm_units2"] = spec.lstm_units2;
  j["conv1_filters"] = spec.conv1_filters;
  j["conv1_kernel"] = spec.conv1_kernel;
  j["conv2_filters"] = spec.conv2_filters;
  j["conv2_kernel"] = spec.conv2_kernel;
  j["dense_units"] = spec.dense_units;
  j["dropout_rate"] = spec.dropout_rate;
  j["utime_widths"] = spec.utime_widths;
  j["utime_kernel"] = spec.utime_kernel;
  j["utime_crop"] = spec.utime_crop;
  return j.dump(2);
}

ModelSpec model_spec_from_json(const std::string& text) {
  ModelSpec spec;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    spec.architecture = j.value("architecture", spec.architecture);
    spec.window = j.value("window", spec.window);
    spec.stations = j.value("stations", spec.stations);
    spec.classes = j.value("classes", spec.classes);
    spec.lstm_units1 = j.value("lstm_units1", spec.lstm_units1);
    spec.lstm_units2 = j.value("lstm_units2", spec.lstm_units2);
    spec.conv1_filters = j.value("conv1_filters", spec.conv1_filters);
    spec.conv1_kernel = j.value("conv1_kernel", spec.conv1_kernel);
    spec.conv2_filters = j.value("conv2_filters", spec.conv2_filters);
    spec.conv2_kernel = j.value("conv2_kernel", spec.conv2_kernel);
    spec.dense_units = j.value("dense_units", spec.dense_units);
    spec.dropout_rate = j.value("dropout_rate", spec.dropout_rate);
    spec.utime_widths = j.value("utime_widths", spec.utime_widths);
    spec.utime_kernel = j.value("utime_kernel", spec.utime_kernel);
    spec.utime_crop = j.value("utime_crop", spec.utime_crop);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model spec: " + std::string(e.what()));
  }
  spec.validate();
  return spec;
}

ModelInfo model_info(const ModelSpec& spec) {
  spec.validate();
  ModelInfo info;
  for (const ParamDef& d : parameter_defs(spec)) info.parameter_count += shape_size(d.shape);
  if (spec.architecture == "cnn") {
    Index h, w;
    cnn_pooled(spec, h, w);
    info.cnn_flatten = spec.conv2_filters * h * w;
  } else if (spec.architecture == "utime") {
    info.utime_input_values = spec.utime_crop * spec.stations;
    info.utime_latent_time = utime_latent(spec);
  }
  return info;
}

Parameter& Model::param(const std::string& id) {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidArgument("unknown parameter: " + id);
  return params[it->second];
}

const Parameter& Model::param(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidArgument("unknown parameter: " + id);
  return params[it->second];
}

std::size_t Model::param_ordinal(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidArgument("unknown parameter: " + id);
  return it->second;
}

Index Model::parameter_count() const {
  Index n = 0;
  for (const Parameter& p : params) n += p.value.size();
  return n;
}

void Model::zero_grads() {
  for (Parameter& p : params) p.grad.data.setZero();
}

void Model::add(Parameter p) {
  if (index_.count(p.id)) throw InvalidArgument("duplicate parameter id: " + p.id);
  index_[p.id] = params.size();
  params.push_back(std::move(p));
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Model model;
  model.spec = spec;
  Rng rng(mix_seed({seed, kInitTag}));
  for (const ParamDef& def : parameter_defs(spec)) {
    Tensor value = Tensor::zeros(def.shape);
    switch (def.kind) {
      case InitKind::Uniform:
        for (Index i = 0; i < value.size(); ++i) value.data[i] = rng.uniform(-def.limit, def.limit);
        break;
      case InitKind::Zero:
        break;
      case InitKind::LstmBias:
        value.data.segment(def.units, def.units).setConstant(1.0);
        break;
    }
    model.add(make_parameter(def.id, std::move(value)));
  }
  return model;
}

TapeBinding bind_parameters(const Model& model, Tape& tape, bool needs_grad) {
  TapeBinding binding;
  binding.tape = &tape;
  binding.params.reserve(model.params.size());
  for (const Parameter& p : model.params) binding.params.push_back(tape.leaf(p.value, needs_grad));
  return binding;
}

Value lstm_layer(Tape& t, Value x, Value wx, Value wh, Value b) {
  const Tensor& vx = t.value(x);
  const Tensor& vwx = t.value(wx);
  const Tensor& vwh = t.value(wh);
  const Tensor& vb = t.value(b);
  require(vx.rank() == 2, "lstm_layer: input must be [T,F]");
  require(vwh.rank() == 2 && vwh.shape[1] == 4 * vwh.shape[0],
          "lstm_layer: wh must be [H,4H]");
  const Index T = vx.shape[0];
  const Index H = vwh.shape[0];
  require(vwx.rank() == 2 && vwx.shape[0] == vx.shape[1] && vwx.shape[1] == 4 * H,
          "lstm_layer: wx must be [F,4H]");
  require(vb.rank() == 1 && vb.shape[0] == 4 * H, "lstm_layer: bias must be [4H]");
  require(T >= 1, "lstm_layer: empty input");

  Value h = t.leaf(Tensor::zeros({1, H}));
  Value c = t.leaf(Tensor::zeros({1, H}));
  std::vector<Value> steps;
  steps.reserve(static_cast<std::size_t>(T));
  for (Index s = 0; s < T; ++s) {
    Value xt = row(t, x, s);
    Value z = add_bias_rows(t, add(t, matmul(t, xt, wx), matmul(t, h, wh)), b);
    Value gi = sigmoid(t, slice_cols(t, z, 0, H));
    Value gf = sigmoid(t, slice_cols(t, z, H, 2 * H));
    Value gc = tanh(t, slice_cols(t, z, 2 * H, 3 * H));
    Value go = sigmoid(t, slice_cols(t, z, 3 * H, 4 * H));
    c = add(t, mul(t, gf, c), mul(t, gi, gc));
    h = mul(t, go, tanh(t, c));
    steps.push_back(h);
  }
  return concat_rows(t, steps);
}

namespace {

Value pv(const Model& model, const TapeBinding& binding, const std::string& id) {
  return binding.params[model.param_ordinal(id)];
}

Value conv_block(Tape& t, Value x, Value k, Value b, bool same_padding = true) {
  return relu(t, bias_channels(t, conv1d(t, x, k, same_padding), b));
}

Value forward_lstm(const Model& model, const TapeBinding& binding, const Matrix& window,
                   Rng& rng, bool training) {
  Tape& t = *binding.tape;
  Value x = t.leaf(Tensor::from_matrix(window));
  Value h1 = lstm_layer(t, x, pv(model, binding, "lstm1.wx"), pv(model, binding, "lstm1.wh"),
                        pv(model, binding, "lstm1.b"));
  Value h2 = lstm_layer(t, h1, pv(model, binding, "lstm2.wx"), pv(model, binding, "lstm2.wh"),
                        pv(model, binding, "lstm2.b"));
  Value last = row(t, h2, model.spec.window - 1);
  Value dropped = dropout(t, last, model.spec.dropout_rate, rng, training);
  return add_bias_rows(t, matmul(t, dropped, pv(model, binding, "head.w")),
                       pv(model, binding, "head.b"));
}

Value forward_cnn(const Model& model, const TapeBinding& binding, const Matrix& window,
                  Rng& rng, bool training) {
  Tape& t = *binding.tape;
  Tensor in;
  in.shape = {1, model.spec.window, model.spec.stations};
  in.data = Tensor::from_matrix(window).data;
  Value x = t.leaf(std::move(in));
  x = relu(t, bias_channels(t, conv2d(t, x, pv(model, binding, "conv1.k")),
                            pv(model, binding, "conv1.b")));
  x = maxpool2d(t, x);
  x = relu(t, bias_channels(t, conv2d(t, x, pv(model, binding, "conv2.k")),
                            pv(model, binding, "conv2.b")));
  x = maxpool2d(t, x);
  const Index flat = t.value(x).size();
  Value v = reshape(t, x, {1, flat});
  Value hidden = relu(t, add_bias_rows(t, matmul(t, v, pv(model, binding, "fc1.w")),
                                       pv(model, binding, "fc1.b")));
  Value dropped = dropout(t, hidden, model.spec.dropout_rate, rng, training);
  return add_bias_rows(t, matmul(t, dropped, pv(model, binding, "fc2.w")),
                       pv(model, binding, "fc2.b"));
}

Value forward_utime(const Model& model, const TapeBinding& binding, const Matrix& window) {
  Tape& t = *binding.tape;
  const ModelSpec& spec = model.spec;
  const auto& widths = spec.utime_widths;
  const Index d = static_cast<Index>(widths.size());
  const Index S = spec.stations;
  const Index crop = spec.utime_crop;

  // Stations become channels; only the most recent `crop` hours are kept.
  Tensor in = Tensor::zeros({S, crop});
  const Index first = spec.window - crop;
  for (Index s = 0; s < S; ++s)
    for (Index r = 0; r < crop; ++r) in.at(s, r) = window(first + r, s);
  Value x = t.leaf(std::move(in));

  std::vector<Value> skips(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) {
    const std::string p = "enc" + std::to_string(i);
    x = conv_block(t, x, pv(model, binding, p + ".conv1.k"), pv(model, binding, p + ".conv1.b"));
    x = conv_block(t, x, pv(model, binding, p + ".conv2.k"), pv(model, binding, p + ".conv2.b"));
    skips[static_cast<std::size_t>(i)] = x;
    x = maxpool1d(t, x);
  }

  x = conv_block(t, x, pv(model, binding, "bottleneck.k"), pv(model, binding, "bottleneck.b"),
                 /*same_padding=*/false);
  const Index t_enc = utime_encoder_time(spec);
  const Index latent = utime_latent(spec);
  x = upsample1d(t, x, t_enc / latent);
  x = conv_block(t, x, pv(model, binding, "bridge.k"), pv(model, binding, "bridge.b"));

  for (Index i = d - 1; i >= 0; --i) {
    const std::string p = "dec" + std::to_string(i);
    x = upsample1d(t, x, 2);
    x = concat_rows(t, {x, skips[static_cast<std::size_t>(i)]});
    x = conv_block(t, x, pv(model, binding, p + ".conv1.k"), pv(model, binding, p + ".conv1.b"));
    x = conv_block(t, x, pv(model, binding, p + ".conv2.k"), pv(model, binding, p + ".conv2.b"));
  }

  Value pooled = mean_over_time(t, x);
  Value rowv = reshape(t, pooled, {1, widths.front()});
  return add_bias_rows(t, matmul(t, rowv, pv(model, binding, "head.w")),
                       pv(model, binding, "head.b"));
}

}  // namespace

Value model_forward(const Model& model, const TapeBinding& binding, const Matrix& window,
                    Rng& dropout_rng, bool training) {
  require(binding.tape != nullptr, "model_forward: binding has no tape");
  require(binding.params.size() == model.params.size(),
          "model_forward: binding does not match the model");
  require(window.rows() == model.spec.window && window.cols() == model.spec.stations,
          "model_forward: window is " + std::to_string(window.rows()) + "x" +
              std::to_string(window.cols()) + ", expected " +
              std::to_string(model.spec.window) + "x" + std::to_string(model.spec.stations));
  if (model.spec.architecture == "lstm")
    return forward_lstm(model, binding, window, dropout_rng, training);
  if (model.spec.architecture == "cnn")
    return forward_cnn(model, binding, window, dropout_rng, training);
  return forward_utime(model, binding, window);
}

Vector predict_logits(const Model& model, const Matrix& window) {
  Tape tape;
  const TapeBinding binding = bind_parameters(model, tape, /*needs_grad=*/false);
  Rng rng(0);
  const Value logits = model_forward(model, binding, window, rng, /*training=*/false);
  const Tensor& v = tape.value(logits);
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = v.data[i];
  return out;
}

AlertLevel argmax_level(const Vector& logits) {
  require(logits.size() == kNumLevels, "argmax_level: expected one logit per alert level");
  Index best = 0;
  for (Index i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;
  return level_from_index(static_cast<int>(best));
}

AlertLevel predict_level(const Model& model, const Matrix& window) {
  return argmax_level(predict_logits(model, window));
}

}  // namespace aircast
