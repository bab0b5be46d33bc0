#include "aircast/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "aircast/rng.hpp"

namespace aircast {

namespace {

constexpr std::uint64_t kShuffleTag = 0x73687566ULL;  // "shuf"
constexpr std::uint64_t kDropoutTag = 0x64726f70ULL;  // "drop"

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

double sample_loss(Tape& tape, const Model& model, const TapeBinding& binding, const Sample& s,
                   Rng& drop_rng, bool training, Value& out) {
  const Value logits = model_forward(model, binding, s.window, drop_rng, training);
  out = softmax_crossentropy(tape, logits, level_index(s.label));
  return tape.value(out).data[0];
}

}  // namespace

void TrainConfig::validate() const {
  require(max_epochs >= 0, "max_epochs must not be negative");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(epsilon > 0.0, "epsilon must be positive");
  require(patience >= 0 && patience <= max_epochs, "patience must lie in [0, max_epochs]");
}

EvalStats evaluate_model(const Model& model, const std::vector<Sample>& samples) {
  require(!samples.empty(), "evaluate_model: no samples");
  EvalStats stats;
  stats.predictions.reserve(samples.size());
  const std::size_t chunk = 64;  // caps tape growth per binding
  Rng no_dropout(0);
  double loss_sum = 0.0;
  std::int64_t correct = 0;
  for (std::size_t at = 0; at < samples.size(); at += chunk) {
    Tape tape;
    const TapeBinding binding = bind_parameters(model, tape, /*needs_grad=*/false);
    const std::size_t stop = std::min(samples.size(), at + chunk);
    for (std::size_t i = at; i < stop; ++i) {
      const Sample& s = samples[i];
      Value loss{};
      loss_sum += sample_loss(tape, model, binding, s, no_dropout, /*training=*/false, loss);
      const Tensor& logits = tape.value_of(tape.inputs_of(loss.node).front());
      Index best = 0;
      for (Index k = 1; k < logits.size(); ++k)
        if (logits.data[k] > logits.data[best]) best = k;
      const AlertLevel predicted = level_from_index(static_cast<int>(best));
      stats.predictions.push_back(predicted);
      if (predicted == s.label) ++correct;
    }
  }
  stats.mean_loss = loss_sum / static_cast<double>(samples.size());
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return stats;
}

TrainResult train_model(Model& model, const std::vector<Sample>& train,
                        const std::vector<Sample>& validation, const TrainConfig& config) {
  config.validate();
  TrainResult result;
  if (config.max_epochs == 0) return result;
  require(!train.empty(), "train_model: empty training set");
  require(!validation.empty(), "train_model: empty validation set");

  // Adam state, one slot per parameter.
  std::vector<Eigen::ArrayXd> m1(model.params.size());
  std::vector<Eigen::ArrayXd> m2(model.params.size());
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    m1[i] = Eigen::ArrayXd::Zero(model.params[i].value.size());
    m2[i] = Eigen::ArrayXd::Zero(model.params[i].value.size());
  }
  std::int64_t adam_step = 0;

  std::vector<Tensor> best_values;
  double best_val_loss = std::numeric_limits<double>::infinity();
  Index best_epoch = 0;
  Index since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (Index epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed({config.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);
    Rng drop_rng(mix_seed({config.seed, kDropoutTag, static_cast<std::uint64_t>(epoch)}));

    double loss_sum = 0.0;
    Index batch_index = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch_size)) {
      ++batch_index;
      const std::size_t stop =
          std::min(order.size(), at + static_cast<std::size_t>(config.batch_size));
      const double batch_n = static_cast<double>(stop - at);

      Tape tape;
      const TapeBinding binding = bind_parameters(model, tape, /*needs_grad=*/true);
      Value total{};
      bool first = true;
      for (std::size_t i = at; i < stop; ++i) {
        Value li{};
        (void)sample_loss(tape, model, binding, train[order[i]], drop_rng, /*training=*/true, li);
        total = first ? li : add(tape, total, li);
        first = false;
      }
      const Value mean = scale(tape, total, 1.0 / batch_n);
      const double batch_loss = tape.value(mean).data[0];
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(batch_index));
      loss_sum += batch_loss * batch_n;
      tape.backward(mean);

      ++adam_step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam_step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam_step));
      for (std::size_t p = 0; p < model.params.size(); ++p) {
        const Eigen::ArrayXd& g = tape.grad(binding.params[p]).data;
        m1[p] = config.beta1 * m1[p] + (1.0 - config.beta1) * g;
        m2[p] = config.beta2 * m2[p] + (1.0 - config.beta2) * g * g;
        model.params[p].value.data -=
            config.learning_rate * (m1[p] / c1) / ((m2[p] / c2).sqrt() + config.epsilon);
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    const EvalStats val = evaluate_model(model, validation);
    stats.val_loss = val.mean_loss;
    stats.val_accuracy = val.accuracy;

    if (config.target_train_accuracy >= 0.0) {
      stats.train_accuracy = evaluate_model(model, train).accuracy;
      if (stats.train_accuracy >= config.target_train_accuracy) {
        result.history.push_back(stats);
        result.reached_target = true;
        result.best_epoch = epoch;
        return result;  // keep the weights that reached the target
      }
    }

    if (val.mean_loss < best_val_loss) {
      best_val_loss = val.mean_loss;
      best_epoch = epoch;
      since_best = 0;
      best_values.clear();
      best_values.reserve(model.params.size());
      for (const Parameter& p : model.params) best_values.push_back(p.value);
    } else {
      ++since_best;
    }

    result.history.push_back(stats);
    if (config.patience > 0 && since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }

  if (best_epoch > 0) {
    for (std::size_t p = 0; p < model.params.size(); ++p)
      model.params[p].value = best_values[p];
  }
  result.best_epoch = best_epoch;
  return result;
}

void save_history(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << "epoch,train_loss,val_loss,val_acc\n";
  char buf[96];
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(e.epoch),
                  e.train_loss, e.val_loss, e.val_accuracy);
    out << buf;
  }
  if (!out) throw ParseError("write failed: " + path);
}

// ---- checkpoints ----

namespace {

constexpr char kCkptMagic[6] = {'A', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kCkptVersion = 1;

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}
void put_u16(std::string& out, std::uint16_t v) { put_bytes(out, &v, sizeof v); }
void put_u32(std::string& out, std::uint32_t v) { put_bytes(out, &v, sizeof v); }
void put_u64(std::string& out, std::uint64_t v) { put_bytes(out, &v, sizeof v); }
void put_i64(std::string& out, std::int64_t v) { put_bytes(out, &v, sizeof v); }
void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  Reader(const std::string& data, std::string what) : data_(data), what_(std::move(what)) {}

  void read(void* p, std::size_t n, const char* context) {
    if (at_ + n > data_.size())
      throw ParseError("truncated " + what_ + ": " + context);
    std::memcpy(p, data_.data() + at_, n);
    at_ += n;
  }
  std::uint16_t u16(const char* c) { std::uint16_t v; read(&v, sizeof v, c); return v; }
  std::uint32_t u32(const char* c) { std::uint32_t v; read(&v, sizeof v, c); return v; }
  std::uint64_t u64(const char* c) { std::uint64_t v; read(&v, sizeof v, c); return v; }
  std::int64_t i64(const char* c) { std::int64_t v; read(&v, sizeof v, c); return v; }
  std::string str(std::size_t n, const char* c) {
    if (at_ + n > data_.size()) throw ParseError("truncated " + what_ + ": " + c);
    std::string s = data_.substr(at_, n);
    at_ += n;
    return s;
  }
  bool done() const { return at_ == data_.size(); }

 private:
  const std::string& data_;
  std::string what_;
  std::size_t at_ = 0;
};

std::string params_payload(const std::vector<std::pair<std::string, Tensor>>& parameters) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(parameters.size()));
  for (const auto& [id, value] : parameters) {
    put_str(out, id);
    put_u32(out, static_cast<std::uint32_t>(value.rank()));
    for (Index e : value.shape) put_i64(out, e);
    put_bytes(out, value.data.data(), sizeof(double) * static_cast<std::size_t>(value.size()));
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> parse_params(const std::string& payload) {
  Reader r(payload, "checkpoint file");
  std::vector<std::pair<std::string, Tensor>> parameters;
  const std::uint32_t count = r.u32("parameter count");
  parameters.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t id_len = r.u32("parameter id length");
    std::string id = r.str(id_len, "parameter id");
    const std::uint32_t rank = r.u32("parameter rank");
    std::vector<Index> shape(rank);
    for (std::uint32_t a = 0; a < rank; ++a) {
      shape[a] = r.i64("parameter extent");
      if (shape[a] < 1) throw ParseError("checkpoint file: bad extent for parameter " + id);
    }
    Tensor value = Tensor::zeros(shape);
    r.read(value.data.data(), sizeof(double) * static_cast<std::size_t>(value.size()),
           "parameter data");
    parameters.emplace_back(std::move(id), std::move(value));
  }
  if (!r.done()) throw ParseError("checkpoint file: trailing bytes after parameters");
  return parameters;
}

std::string rule_json(const RuleSpec& rule) {
  nlohmann::json j;
  j["id"] = rule.id;
  j["percentiles"] = rule.percentiles;
  j["min_stations"] = rule.min_stations;
  j["run_hours"] = rule.run_hours;
  j["same_stations"] = rule.same_stations;
  return j.dump(2);
}

RuleSpec rule_from_json(const std::string& text) {
  RuleSpec rule;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    rule.id = j.at("id").get<int>();
    rule.percentiles = j.at("percentiles").get<std::array<int, 3>>();
    rule.min_stations = j.at("min_stations").get<int>();
    rule.run_hours = j.at("run_hours").get<int>();
    rule.same_stations = j.at("same_stations").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint rule section: " + std::string(e.what()));
  }
  rule.validate();
  return rule;
}

}  // namespace

Checkpoint make_checkpoint(const Model& model, const RuleSpec& rule,
                           const NormalizationParams& normalization, Block block,
                           std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.model = model.spec;
  ckpt.parameters.reserve(model.params.size());
  for (const Parameter& p : model.params) ckpt.parameters.emplace_back(p.id, p.value);
  ckpt.rule = rule;
  ckpt.normalization = normalization;
  ckpt.block = block;
  ckpt.seed = seed;
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string body;
  const auto section = [&body](const std::string& name, const std::string& payload) {
    put_str(body, name);
    put_u64(body, payload.size());
    body.append(payload);
  };

  nlohmann::json meta;
  meta["block"] = static_cast<int>(ckpt.block);
  meta["seed"] = ckpt.seed;

  section("model", model_spec_to_json(ckpt.model));
  section("meta", meta.dump(2));
  section("normalization", normalization_to_json(ckpt.normalization));
  section("params", params_payload(ckpt.parameters));
  section("rule", rule_json(ckpt.rule));

  std::string out;
  put_bytes(out, kCkptMagic, sizeof kCkptMagic);
  put_u16(out, kCkptVersion);
  put_u32(out, 5);
  out += body;

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ParseError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open checkpoint file: " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader r(data, "checkpoint file");
  char magic[6];
  r.read(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
    throw ParseError("not a checkpoint file: " + path);
  const std::uint16_t version = r.u16("version");
  if (version != kCkptVersion)
    throw ParseError("unsupported checkpoint version: " + std::to_string(version));
  const std::uint32_t sections = r.u32("section count");

  Checkpoint ckpt;
  bool saw_model = false, saw_meta = false, saw_norm = false, saw_params = false,
       saw_rule = false;
  for (std::uint32_t s = 0; s < sections; ++s) {
    const std::uint32_t name_len = r.u32("section name length");
    const std::string name = r.str(name_len, "section name");
    const std::uint64_t size = r.u64("section size");
    const std::string payload = r.str(size, ("section " + name).c_str());
    if (name == "model") {
      ckpt.model = model_spec_from_json(payload);
      saw_model = true;
    } else if (name == "meta") {
      try {
        const nlohmann::json j = nlohmann::json::parse(payload);
        ckpt.block = block_from_index(j.at("block").get<int>());
        ckpt.seed = j.at("seed").get<std::uint64_t>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint meta section: " + std::string(e.what()));
      }
      saw_meta = true;
    } else if (name == "normalization") {
      ckpt.normalization = normalization_from_json(payload);
      saw_norm = true;
    } else if (name == "params") {
      ckpt.parameters = parse_params(payload);
      saw_params = true;
    } else if (name == "rule") {
      ckpt.rule = rule_from_json(payload);
      saw_rule = true;
    } else {
      throw ParseError("unknown checkpoint section: " + name);
    }
  }
  if (!r.done()) throw ParseError("checkpoint file: trailing bytes after sections");
  if (!saw_model || !saw_meta || !saw_norm || !saw_params || !saw_rule)
    throw ParseError("checkpoint file: missing section");
  return ckpt;
}

Model restore_model(const Checkpoint& ckpt) {
  Model model = build_model(ckpt.model, ckpt.seed);
  if (ckpt.parameters.size() != model.params.size())
    throw ParseError("checkpoint file: parameter list does not match the architecture");
  for (const auto& [id, value] : ckpt.parameters) {
    Parameter& p = model.param(id);
    if (p.value.shape != value.shape)
      throw ParseError("checkpoint file: shape mismatch for parameter " + id);
    p.value = value;
  }
  return model;
}

}  // namespace aircast
