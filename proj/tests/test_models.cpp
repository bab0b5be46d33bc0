#include <doctest.h>

#include <cmath>

#include "aircast/gradcheck.hpp"
#include "aircast/models.hpp"
#include "aircast/rng.hpp"

using namespace aircast;

namespace {

ModelSpec lstm_spec(Index window = 24, Index stations = 12) {
  ModelSpec s;
  s.architecture = "lstm";
  s.window = window;
  s.stations = stations;
  return s;
}

ModelSpec cnn_spec(Index window = 24, Index stations = 12) {
  ModelSpec s;
  s.architecture = "cnn";
  s.window = window;
  s.stations = stations;
  return s;
}

ModelSpec utime_spec(Index window = 168, Index stations = 12) {
  ModelSpec s;
  s.architecture = "utime";
  s.window = window;
  s.stations = stations;
  return s;
}

// Small enough for exhaustive finite differences but structurally complete.
ModelSpec tiny_utime() {
  ModelSpec s = utime_spec(30, 5);
  s.utime_widths = {4, 4};
  s.utime_kernel = 5;
  s.utime_crop = 24;  // t_enc 6, latent 2, bridge upsample x3
  return s;
}

Matrix random_window(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w(spec.window, spec.stations);
  for (Index r = 0; r < w.rows(); ++r)
    for (Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform();
  return w;
}

Index layer_size(const Model& m, std::initializer_list<const char*> ids) {
  Index total = 0;
  for (const char* id : ids) total += m.param(id).value.size();
  return total;
}

}  // namespace

TEST_CASE("lstm parameter counts per layer") {
  const Model m = build_model(lstm_spec(), 1);
  CHECK(layer_size(m, {"lstm1.wx", "lstm1.wh", "lstm1.b"}) == 12600);
  CHECK(layer_size(m, {"lstm2.wx", "lstm2.wh", "lstm2.b"}) == 2440);
  CHECK(layer_size(m, {"head.w", "head.b"}) == 44);
  CHECK(m.parameter_count() == 12600 + 2440 + 44);
  CHECK(model_info(lstm_spec()).parameter_count == 15084);
}

TEST_CASE("cnn flatten width tracks the window") {
  CHECK(model_info(cnn_spec(24, 12)).cnn_flatten == 1152);
  CHECK(model_info(cnn_spec(168, 12)).cnn_flatten == 8064);
  CHECK(model_info(cnn_spec(72, 12)).cnn_flatten == 3456);

  // conv1 400+16, conv2 9216+64, fc1 1152*20+20, fc2 80+4
  CHECK(model_info(cnn_spec(24, 12)).parameter_count == 32840);
}

TEST_CASE("utime geometry") {
  const ModelInfo info = model_info(utime_spec());
  CHECK(info.utime_input_values == 1920);  // 160 cropped hours x 12 stations
  CHECK(info.utime_latent_time == 1);

  const ModelInfo small = model_info(tiny_utime());
  CHECK(small.utime_input_values == 120);
  CHECK(small.utime_latent_time == 2);
}

TEST_CASE("model_info parameter_count matches the built parameters") {
  for (const ModelSpec& spec : {lstm_spec(6, 4), cnn_spec(8, 4), tiny_utime()}) {
    const Model m = build_model(spec, 17);
    Index total = 0;
    for (const Parameter& p : m.params) total += p.value.size();
    CHECK(model_info(spec).parameter_count == total);
    CHECK(m.parameter_count() == total);
  }
}

TEST_CASE("build_model is a pure function of spec and seed") {
  for (const ModelSpec& spec : {lstm_spec(6, 4), cnn_spec(8, 4), tiny_utime()}) {
    const Model a = build_model(spec, 42);
    const Model b = build_model(spec, 42);
    REQUIRE(a.params.size() == b.params.size());
    for (std::size_t i = 0; i < a.params.size(); ++i) {
      CHECK(a.params[i].id == b.params[i].id);
      CHECK((a.params[i].value.data == b.params[i].value.data).all());
      CHECK(a.params[i].value.all_finite());
    }
    const Model c = build_model(spec, 43);
    bool any_differs = false;
    for (std::size_t i = 0; i < a.params.size(); ++i)
      if (!(a.params[i].value.data == c.params[i].value.data).all()) any_differs = true;
    CHECK(any_differs);
  }
}

TEST_CASE("initial biases are zero except the lstm forget gate") {
  const Model m = build_model(lstm_spec(), 7);
  const Tensor& b1 = m.param("lstm1.b").value;
  REQUIRE(b1.size() == 200);
  for (Index i = 0; i < 50; ++i) CHECK(b1.at(i) == 0.0);          // input gate
  for (Index i = 50; i < 100; ++i) CHECK(b1.at(i) == 1.0);        // forget gate
  for (Index i = 100; i < 200; ++i) CHECK(b1.at(i) == 0.0);       // cell, output
  CHECK((m.param("head.b").value.data == 0.0).all());

  const Model cnn = build_model(cnn_spec(8, 4), 7);
  CHECK((cnn.param("conv1.b").value.data == 0.0).all());
  CHECK((cnn.param("fc2.b").value.data == 0.0).all());
}

TEST_CASE("fresh models map the zero window to zero logits") {
  // Every path from input to logits passes through a zero-initialized bias or
  // a product with the zero input, so initial logits vanish identically.
  for (const ModelSpec& spec : {lstm_spec(6, 4), cnn_spec(8, 4), tiny_utime()}) {
    const Model m = build_model(spec, 11);
    const Vector logits = predict_logits(m, Matrix::Zero(spec.window, spec.stations));
    REQUIRE(logits.size() == 4);
    for (Index i = 0; i < 4; ++i) CHECK(logits[i] == 0.0);
    CHECK(predict_level(m, Matrix::Zero(spec.window, spec.stations)) == AlertLevel::NoAlert);
  }
}

TEST_CASE("model parameter registry") {
  Model m = build_model(cnn_spec(8, 4), 3);
  CHECK(m.param_ordinal("conv1.k") == 0);
  CHECK_THROWS_AS(m.param("nope"), InvalidArgument);
  CHECK_THROWS_AS(m.add(make_parameter("conv1.k", Tensor::zeros({1}))), InvalidArgument);

  m.param("conv1.k").grad = Tensor::constant(m.param("conv1.k").value.shape, 2.0);
  m.zero_grads();
  CHECK((m.param("conv1.k").grad.data == 0.0).all());
}

TEST_CASE("model spec json round trip") {
  ModelSpec s = tiny_utime();
  s.dropout_rate = 0.125;
  s.lstm_units1 = 9;
  s.conv2_kernel = 7;
  const ModelSpec back = model_spec_from_json(model_spec_to_json(s));
  CHECK(back.architecture == s.architecture);
  CHECK(back.window == s.window);
  CHECK(back.stations == s.stations);
  CHECK(back.classes == s.classes);
  CHECK(back.lstm_units1 == 9);
  CHECK(back.lstm_units2 == s.lstm_units2);
  CHECK(back.conv1_filters == s.conv1_filters);
  CHECK(back.conv2_kernel == 7);
  CHECK(back.dense_units == s.dense_units);
  CHECK(back.dropout_rate == 0.125);
  CHECK(back.utime_widths == s.utime_widths);
  CHECK(back.utime_kernel == s.utime_kernel);
  CHECK(back.utime_crop == s.utime_crop);

  CHECK_THROWS_AS(model_spec_from_json("not json"), ParseError);

  // partial json falls back to defaults
  const ModelSpec sparse = model_spec_from_json("{\"architecture\":\"lstm\",\"stations\":6}");
  CHECK(sparse.architecture == "lstm");
  CHECK(sparse.stations == 6);
  CHECK(sparse.window == 24);
  CHECK(sparse.lstm_units1 == 50);
}

TEST_CASE("spec validation rejects impossible geometry") {
  ModelSpec bad = utime_spec(24, 12);  // crop 160 exceeds the window
  CHECK_THROWS_WITH_AS(bad.validate(), "utime_crop must lie in [1, window]", InvalidArgument);

  ModelSpec crop = utime_spec();
  crop.utime_crop = 150;  // not divisible by 2^5
  CHECK_THROWS_AS(crop.validate(), InvalidArgument);

  ModelSpec short_crop = tiny_utime();
  short_crop.utime_crop = 16;  // t_enc 4 < kernel 5
  CHECK_THROWS_WITH_AS(short_crop.validate(), "utime_crop too small: bottleneck kernel does not fit",
                       InvalidArgument);

  ModelSpec cnn_small = cnn_spec(3, 12);
  CHECK_THROWS_AS(cnn_small.validate(), InvalidArgument);
  ModelSpec cnn_narrow = cnn_spec(24, 3);
  CHECK_THROWS_AS(cnn_narrow.validate(), InvalidArgument);

  ModelSpec unknown = cnn_spec();
  unknown.architecture = "mlp";
  CHECK_THROWS_WITH_AS(unknown.validate(), "unknown architecture: mlp", InvalidArgument);

  ModelSpec drop = lstm_spec();
  drop.dropout_rate = 1.0;
  CHECK_THROWS_AS(drop.validate(), InvalidArgument);
}

TEST_CASE("lstm_layer closed form at T = 1") {
  Tape t;
  const double xv = 0.7, wi = 0.3, wf = -0.2, wg = 0.9, wo = -0.5;
  const double bi = 0.1, bf = 0.2, bg = -0.3, bo = 0.4;
  Tensor x = Tensor::zeros({1, 1});
  x.at(0) = xv;
  Tensor wx = Tensor::zeros({1, 4});
  wx.data << wi, wf, wg, wo;
  Tensor b = Tensor::zeros({4});
  b.data << bi, bf, bg, bo;
  const Value h = lstm_layer(t, t.leaf(x), t.leaf(wx), t.leaf(Tensor::zeros({1, 4})), t.leaf(b));

  const auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double zi = xv * wi + bi, zg = xv * wg + bg, zo = xv * wo + bo;
  const double c1 = sig(zi) * std::tanh(zg);  // c0 = 0 kills the forget term
  const double expect = sig(zo) * std::tanh(c1);

  const Tensor& hv = t.value(h);
  REQUIRE(hv.shape == std::vector<Index>{1, 1});
  CHECK(hv.at(0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("lstm_layer with zero weights stays silent") {
  Tape t;
  Rng rng(9);
  Tensor x = Tensor::zeros({5, 3});
  for (Index i = 0; i < x.size(); ++i) x.data[i] = rng.uniform(-2.0, 2.0);
  const Value h = lstm_layer(t, t.leaf(x), t.leaf(Tensor::zeros({3, 8})),
                             t.leaf(Tensor::zeros({2, 8})), t.leaf(Tensor::zeros({8})));
  const Tensor& hv = t.value(h);
  CHECK(hv.shape == std::vector<Index>{5, 2});
  CHECK((hv.data == 0.0).all());
}

TEST_CASE("lstm_layer is causal") {
  Rng rng(13);
  const Index T = 6, F = 3, H = 4;
  Tensor x = Tensor::zeros({T, F});
  Tensor wx = Tensor::zeros({F, 4 * H});
  Tensor wh = Tensor::zeros({H, 4 * H});
  Tensor b = Tensor::zeros({4 * H});
  for (Tensor* p : {&x, &wx, &wh, &b})
    for (Index i = 0; i < p->size(); ++i) p->data[i] = rng.uniform(-0.8, 0.8);

  Tape t1;
  const Tensor full = t1.value(lstm_layer(t1, t1.leaf(x), t1.leaf(wx), t1.leaf(wh), t1.leaf(b)));

  Tensor prefix = Tensor::zeros({4, F});
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < F; ++c) prefix.at(r, c) = x.at(r, c);
  Tape t2;
  const Tensor part =
      t2.value(lstm_layer(t2, t2.leaf(prefix), t2.leaf(wx), t2.leaf(wh), t2.leaf(b)));

  // changing the future must not move past outputs, down to the last bit
  CHECK(part.matrix() == full.matrix().topRows(4));
}

TEST_CASE("lstm_layer shape validation") {
  Tape t;
  const Value x = t.leaf(Tensor::zeros({4, 3}));
  const Value wh = t.leaf(Tensor::zeros({2, 8}));
  CHECK_THROWS_AS(lstm_layer(t, x, t.leaf(Tensor::zeros({2, 8})), wh, t.leaf(Tensor::zeros({8}))),
                  InvalidArgument);  // wx rows must match F
  CHECK_THROWS_AS(lstm_layer(t, x, t.leaf(Tensor::zeros({3, 8})), wh, t.leaf(Tensor::zeros({4}))),
                  InvalidArgument);  // bias must be 4H
  CHECK_THROWS_AS(lstm_layer(t, x, t.leaf(Tensor::zeros({3, 8})),
                             t.leaf(Tensor::zeros({2, 7})), t.leaf(Tensor::zeros({8}))),
                  InvalidArgument);  // wh must be [H, 4H]
}

TEST_CASE("model_forward validates the binding and the window") {
  const Model m = build_model(cnn_spec(8, 4), 5);
  Rng rng(0);
  CHECK_THROWS_AS(model_forward(m, TapeBinding{}, Matrix::Zero(8, 4), rng, false),
                  InvalidArgument);
  Tape t;
  const TapeBinding binding = bind_parameters(m, t);
  CHECK_THROWS_AS(model_forward(m, binding, Matrix::Zero(9, 4), rng, false), InvalidArgument);
  CHECK_THROWS_AS(model_forward(m, binding, Matrix::Zero(8, 3), rng, false), InvalidArgument);
  const Value ok = model_forward(m, binding, Matrix::Zero(8, 4), rng, false);
  CHECK(t.value(ok).shape == std::vector<Index>{1, 4});
}

TEST_CASE("forward passes stay finite and deterministic") {
  for (const ModelSpec& spec : {lstm_spec(6, 4), cnn_spec(8, 4), tiny_utime()}) {
    const Model m = build_model(spec, 23);
    const Matrix w = random_window(spec, 31);
    const Vector a = predict_logits(m, w);
    const Vector b = predict_logits(m, w);
    REQUIRE(a.size() == 4);
    CHECK(a.allFinite());
    CHECK(a == b);
    // a nonzero input should produce distinct logits through random weights
    bool distinct = false;
    for (Index i = 1; i < 4; ++i)
      if (a[i] != a[0]) distinct = true;
    CHECK(distinct);
  }
}

TEST_CASE("argmax_level picks the first maximum") {
  Vector logits(4);
  logits << 0.1, 3.0, 2.0, -1.0;
  CHECK(argmax_level(logits) == AlertLevel::PreWarning);
  logits << 5.0, 5.0, 0.0, 0.0;
  CHECK(argmax_level(logits) == AlertLevel::NoAlert);
  logits << -3.0, -1.0, -2.0, -0.5;
  CHECK(argmax_level(logits) == AlertLevel::Alert);
  CHECK_THROWS_AS(argmax_level(Vector::Zero(3)), InvalidArgument);
}

TEST_CASE("check_gradients passes on small instances of each architecture") {
  GradCheckConfig cfg;
  cfg.max_coords = 120;
  cfg.seed = 5;

  for (const ModelSpec& spec : {lstm_spec(6, 4), cnn_spec(8, 4), tiny_utime()}) {
    CAPTURE(spec.architecture);
    Model m = build_model(spec, 91);
    std::vector<Sample> batch;
    for (int i = 0; i < 2; ++i) {
      Sample s;
      s.window = random_window(spec, 100 + static_cast<std::uint64_t>(i));
      s.label = i == 0 ? AlertLevel::NoAlert : AlertLevel::Warning;
      s.day = Day::of(2019, 1, 1);
      s.block = Block::II;
      batch.push_back(std::move(s));
    }
    const GradCheckReport report = check_gradients(m, batch, cfg);
    CAPTURE(report.max_rel_error);
    CHECK(report.passed);
    CHECK(report.max_rel_error < cfg.tolerance);
    CHECK(report.coords.size() == static_cast<std::size_t>(cfg.max_coords));
    CHECK(report.total_coords == m.parameter_count());
  }
}
