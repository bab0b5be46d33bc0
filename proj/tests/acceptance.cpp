// Acceptance harness: ten end-to-end criteria, one verdict line each.
// Exits 0 only when every criterion passes. Run via ctest or directly;
// AIRCAST_CLI is not needed (everything runs in-process).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aircast/gradcheck.hpp"
#include "aircast/pipeline.hpp"
#include "aircast/rng.hpp"
#include "oracles.hpp"

using namespace aircast;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void verdict(int criterion, bool passed, const std::string& detail, double seconds) {
  if (!passed) ++g_failures;
  std::printf("[%s] criterion %2d: %s (%.1f s)\n", passed ? "PASS" : "FAIL", criterion,
              detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable: " + path + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ostream& null_log() {
  static std::ostringstream sink;
  sink.str("");
  return sink;
}

const std::vector<Block> kAllBlocks{Block::I, Block::II, Block::III, Block::IV};

// ---- criteria 1 + 2: labeling oracle equivalence and rule dominance ----

void criteria_1_2() {
  Timer timer;
  Rng rng(20250801);
  const int kGrids = 1000;
  std::int64_t blocks_checked = 0;
  std::int64_t mismatches = 0;
  std::int64_t dominance_violations = 0;
  std::string first_mismatch;

  for (int g = 0; g < kGrids; ++g) {
    const HourlyGrid grid = oracle::random_grid(rng, 12);
    const std::int64_t days = grid.hours() / 24;
    const Day day0 = day_of(grid.start);

    const RuleSpec rule1 = RuleSpec::rule(1);
    const RuleSpec rule2 = RuleSpec::rule(2);
    const ThresholdTable table1 = compute_thresholds(grid, rule1);
    const ThresholdTable table2 = compute_thresholds(grid, rule2);

    for (std::int64_t d = 0; d < days; ++d) {
      const Day day = day0 + d;
      for (Block block : kAllBlocks) {
        const AlertLevel lib1 = block_alert_level(grid, table1, rule1, day, block);
        const AlertLevel lib2 = block_alert_level(grid, table2, rule2, day, block);
        const AlertLevel ref1 = oracle::block_level(grid, rule1, day, block);
        const AlertLevel ref2 = oracle::block_level(grid, rule2, day, block);
        ++blocks_checked;
        if (lib1 != ref1 || lib2 != ref2) {
          ++mismatches;
          if (first_mismatch.empty())
            first_mismatch = " first at grid " + std::to_string(g) + " " + day.iso() + " block " +
                             std::to_string(static_cast<int>(block));
        }
        if (level_index(lib2) < level_index(lib1)) ++dominance_violations;
      }
    }
  }

  const double elapsed = timer.seconds();
  verdict(1, mismatches == 0 && elapsed < 60.0,
          "labeling matches the brute-force enumerator on " + std::to_string(blocks_checked) +
              " blocks from " + std::to_string(kGrids) + " random 12-station grids, both rules; " +
              std::to_string(mismatches) + " mismatches" + first_mismatch,
          elapsed);
  verdict(2, dominance_violations == 0,
          "Rule II label >= Rule I label on " +
              std::to_string(blocks_checked - dominance_violations) + "/" +
              std::to_string(blocks_checked) + " blocks",
          elapsed);
}

// ---- criterion 3: percentile engine vs sort-and-index oracle ----

void criterion_3() {
  Timer timer;
  Rng rng(33);
  const int kLists = 10000;
  std::int64_t mismatches = 0;

  // pinned examples first
  if (annual_percentile({10, 20, 30, 40}, 50) != 20.0) ++mismatches;
  if (annual_percentile({10, 20, 30, 40}, 75) != 30.0) ++mismatches;
  {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    if (annual_percentile(v, 95) != 95.0) ++mismatches;
    v.clear();
    for (int i = 1; i <= 8760; ++i) v.push_back(i);
    if (annual_percentile(v, 75) != 6570.0) ++mismatches;
  }

  for (int i = 0; i < kLists; ++i) {
    const std::int64_t n = rng.uniform_int(1, 500);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n));
    const bool discrete = rng.uniform_int(0, 1) == 0;  // ties stress the rank edge
    for (std::int64_t k = 0; k < n; ++k)
      values.push_back(discrete ? static_cast<double>(rng.uniform_int(0, 12))
                                : rng.uniform(-100.0, 100.0));
    const int p = static_cast<int>(rng.uniform_int(1, 99));
    if (annual_percentile(values, p) != oracle::percentile(values, p)) ++mismatches;
  }

  verdict(3, mismatches == 0,
          "nearest-rank percentile equals the sort-and-index oracle on " +
              std::to_string(kLists) + " random lists plus the pinned examples; " +
              std::to_string(mismatches) + " mismatches",
          timer.seconds());
}

// ---- criterion 4: gradient verification on the three architectures ----

ModelSpec default_spec(const std::string& architecture) {
  ModelSpec spec;
  spec.architecture = architecture;
  spec.window = architecture == "utime" ? 168 : 24;
  spec.stations = 12;
  return spec;
}

void criterion_4() {
  Timer timer;
  std::string detail;
  bool ok = true;

  for (const char* arch : {"lstm", "cnn", "utime"}) {
    const ModelSpec spec = default_spec(arch);
    Model model = build_model(spec, 404);
    Rng rng(405);
    std::vector<Sample> batch;
    for (int i = 0; i < 2; ++i) {
      Sample s;
      s.window = Matrix(spec.window, spec.stations);
      for (Index r = 0; r < spec.window; ++r)
        for (Index c = 0; c < spec.stations; ++c) s.window(r, c) = rng.uniform();
      s.label = level_from_index((i * 2 + 1) % kNumLevels);
      batch.push_back(std::move(s));
    }
    GradCheckConfig cfg;
    cfg.max_coords = 200;
    cfg.seed = 406;
    const GradCheckReport report = check_gradients(model, batch, cfg);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s%s %lld coords err %.2e", detail.empty() ? "" : ", ", arch,
                  static_cast<long long>(report.coords.size()), report.max_rel_error);
    detail += buf;
    ok = ok && report.passed && report.coords.size() >= 200 && report.max_rel_error < 1e-4;
  }

  const double elapsed = timer.seconds();
  verdict(4, ok && elapsed < 300.0, "finite differences confirm gradients, max rel error < 1e-4: " + detail,
          elapsed);
}

// ---- criteria 5 + 6 share the synthetic sample pipeline ----

std::vector<Sample> synthetic_samples(const SynthSpec& sspec, Index window, int fit_last_year) {
  const SynthResult synth = generate_synthetic(sspec);
  const NormalizationParams norm =
      fit_minmax(synth.grid, synth.grid.start, year_start(fit_last_year + 1));
  const HourlyGrid scaled = apply_minmax(synth.grid, norm);
  const std::vector<BlockLabel> labels =
      label_dataset(synth.grid, sspec.rule, {Block::II, Block::III});
  return make_windows(scaled, labels, window).samples;
}

void criterion_5() {
  bool all_ok = true;
  std::string detail;
  double total = 0.0;

  SynthSpec sspec;
  sspec.stations = 12;
  sspec.days = 30;
  sspec.start_year = 2015;
  sspec.seed = 505;
  sspec.signal = true;
  sspec.level_weights = {0.25, 0.25, 0.25, 0.25};
  sspec.rule = RuleSpec::rule(1);

  for (const char* arch : {"lstm", "cnn", "utime"}) {
    Timer timer;
    const ModelSpec spec = default_spec(arch);
    std::vector<Sample> samples = synthetic_samples(sspec, spec.window, 2015);
    if (samples.size() > 32) samples.resize(32);
    Model model = build_model(spec, 506);
    TrainConfig tc;
    tc.max_epochs = 500;
    tc.patience = 0;
    tc.batch_size = 8;
    tc.learning_rate = spec.architecture == "utime" ? 5e-3 : 3e-3;
    tc.seed = 507;
    tc.target_train_accuracy = 0.99;
    const TrainResult result = train_model(model, samples, samples, tc);
    const double elapsed = timer.seconds();
    total += elapsed;

    const bool ok = samples.size() == 32 && result.reached_target &&
                    result.history.size() <= 500 && elapsed < 300.0;
    all_ok = all_ok && ok;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s%s %lld epochs acc %.3f %.0fs", detail.empty() ? "" : ", ",
                  arch, static_cast<long long>(result.history.size()),
                  result.history.empty() ? 0.0 : result.history.back().train_accuracy, elapsed);
    detail += buf;
  }

  verdict(5, all_ok, "each architecture memorizes the 32-sample synthetic set (>=99% train acc, <=500 epochs, <5 min each): " + detail,
          total);
}

void criterion_6() {
  Timer timer;

  SynthSpec sspec;
  sspec.stations = 12;
  sspec.days = 1007;  // 2015 + 2016 + 276 days of 2017 -> exactly 2000 labeled blocks
  sspec.start_year = 2015;
  sspec.seed = 606;
  sspec.signal = true;
  sspec.level_weights = {0.4, 0.2, 0.2, 0.2};
  sspec.rule = RuleSpec::rule(1);

  const SynthResult synth = generate_synthetic(sspec);
  const NormalizationParams norm = fit_minmax(synth.grid, synth.grid.start, year_start(2016));
  const HourlyGrid scaled = apply_minmax(synth.grid, norm);
  const std::vector<BlockLabel> labels =
      label_dataset(synth.grid, sspec.rule, {Block::II, Block::III});

  // The dataset is the 2000 blocks with full 168-hour coverage. Each model
  // reads its own canonical window back from the block start (the 24-hour
  // view exists for every one of them), so both train on the same blocks.
  const std::vector<Sample> seq168 = make_windows(scaled, labels, 168).samples;
  std::set<std::pair<std::int64_t, int>> blocks;
  for (const Sample& s : seq168) blocks.insert({s.day.count(), static_cast<int>(s.block)});
  std::vector<Sample> seq24;
  for (Sample& s : make_windows(scaled, labels, 24).samples)
    if (blocks.count({s.day.count(), static_cast<int>(s.block)})) seq24.push_back(std::move(s));

  std::int64_t train_n = 0, val_n = 0, test_n = 0;
  const auto train_and_test = [&](const std::string& arch, const std::vector<Sample>& samples,
                                  Index window, Index max_epochs) -> std::pair<double, Index> {
    SplitSpec split;
    split.train = {2015, 2015};
    split.validation = {2016, 2016};
    split.test = {2017, 2017};
    const SplitResult parts = split_by_year(samples, split);
    const BalancedDataset balanced = balance(parts.train, 607);
    train_n = static_cast<std::int64_t>(parts.train.size());
    val_n = static_cast<std::int64_t>(parts.validation.size());
    test_n = static_cast<std::int64_t>(parts.test.size());

    ModelSpec spec = default_spec(arch);
    spec.window = window;
    Model model = build_model(spec, 608);
    TrainConfig tc;
    tc.max_epochs = max_epochs;
    tc.patience = 0;
    tc.batch_size = 32;
    tc.learning_rate = 1e-3;
    tc.seed = 609;
    const TrainResult result = train_model(model, balanced.samples, parts.validation, tc);
    return {evaluate_model(model, parts.test).accuracy,
            static_cast<Index>(result.history.size())};
  };

  const auto [cnn_acc, cnn_epochs] = train_and_test("cnn", seq24, 24, 30);
  const auto [utime_acc, utime_epochs] = train_and_test("utime", seq168, 168, 3);

  char buf[288];
  std::snprintf(buf, sizeof buf,
                "CNN (24 h window) test accuracy %.3f (>=0.90 gated, %lld epochs) on the "
                "2000-sample separable set [%lld train/%lld val/%lld test]; recorded, not gated: "
                "U-Time (168 h) %.3f (%lld epochs), CNN >= U-Time: %s",
                cnn_acc, static_cast<long long>(cnn_epochs), train_n, val_n, test_n, utime_acc,
                static_cast<long long>(utime_epochs), cnn_acc >= utime_acc ? "yes" : "no");
  verdict(6, seq168.size() == 2000 && seq24.size() == 2000 && cnn_acc >= 0.90, buf,
          timer.seconds());
}

// ---- criterion 7: economic metric ----

void criterion_7() {
  Timer timer;
  bool ok = true;
  std::string why;

  const auto approx = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  const auto lv = [](std::initializer_list<int> ks) {
    std::vector<AlertLevel> out;
    for (int k : ks) out.push_back(level_from_index(k));
    return out;
  };

  // 6h * (2.40 - 0.40) = 12.00 over; 6h * (1.20 - 0.60) = 3.60 under
  const EconomicReport a = economic_impact(lv({0, 2}), lv({3, 1}));
  ok = ok && approx(a.overcharge, 12.0) && approx(a.undercharge, 3.6) &&
       approx(a.fairness_gap, 15.6) && approx(a.actual_total, 9.6) &&
       approx(a.predicted_total, 18.0);
  if (!ok) why = " hand case 1 off";

  // truths {0,1,2,3,0} preds {1,1,1,3,0}: over 1.20, under 3.60, gap 4.80
  const EconomicReport b = economic_impact(lv({0, 1, 2, 3, 0}), lv({1, 1, 1, 3, 0}));
  const bool ok_b = approx(b.overcharge, 1.2) && approx(b.undercharge, 3.6) &&
                    approx(b.fairness_gap, 4.8) && approx(b.actual_total, 30.0) &&
                    approx(b.predicted_total, 27.6);
  if (!ok_b && why.empty()) why = " hand case 2 off";
  ok = ok && ok_b;

  // fairness = 0 iff predictions equal truths
  Rng rng(707);
  std::vector<AlertLevel> truth;
  for (int i = 0; i < 100; ++i)
    truth.push_back(level_from_index(static_cast<int>(rng.uniform_int(0, 3))));
  const EconomicReport equal = economic_impact(truth, truth);
  bool iff = equal.fairness_gap == 0.0;
  for (std::size_t i = 0; i < truth.size() && iff; ++i) {
    for (int d = 1; d <= 3; ++d) {
      std::vector<AlertLevel> preds = truth;
      preds[i] = level_from_index((level_index(truth[i]) + d) % 4);
      if (economic_impact(truth, preds).fairness_gap <= 0.0) iff = false;
    }
  }
  if (!iff && why.empty()) why = " fairness!=0 iff equality violated";
  ok = ok && iff;

  verdict(7, ok,
          "economic_impact reproduces hand-computed euros within 1e-9; fairness gap is zero "
          "exactly on equal predictions and positive under every single flip" + why,
          timer.seconds());
}

// ---- criterion 8: bitwise pipeline determinism ----

void criterion_8() {
  Timer timer;
  const fs::path root = "acceptance_c8";
  fs::remove_all(root);

  const auto pipeline = [&root](const char* tag) -> fs::path {
    const fs::path base = root / tag;
    const fs::path data = base / "data";
    const fs::path run = base / "run";
    const fs::path eval = base / "eval";
    fs::create_directories(data);

    RunConfig synth;
    synth.out = data.string();
    synth.seed = 808;
    synth.rule = 1;
    synth.synth.stations = 8;
    synth.synth.days = 750;
    synth.synth.start_year = 2017;
    synth.synth.level_weights = {0.4, 0.2, 0.2, 0.2};
    run_synth(synth, null_log());

    RunConfig ingest;
    ingest.input = (data / "synthetic.csv").string();
    ingest.out = data.string();
    run_ingest(ingest, null_log());

    RunConfig label = ingest;
    label.rule = 1;
    run_label(label, null_log());

    RunConfig train;
    train.input = (data / "synthetic.csv").string();
    train.out = run.string();
    train.rule = 1;
    train.block = Block::II;
    train.window = 24;
    train.model = "cnn";
    train.seed = 809;
    train.split.train = {2017, 2017};
    train.split.validation = {2018, 2018};
    train.split.test = {2019, 2019};
    train.train.max_epochs = 5;
    train.train.patience = 0;
    train.train.batch_size = 32;
    run_train(train, null_log());

    RunConfig eval_cfg;
    eval_cfg.input = (data / "synthetic.csv").string();
    eval_cfg.out = eval.string();
    eval_cfg.checkpoint = (run / "checkpoint.bin").string();
    run_eval(eval_cfg, null_log());
    return base;
  };

  const fs::path a = pipeline("a");
  const fs::path b = pipeline("b");

  const std::vector<std::string> artifacts{
      "data/synthetic.csv", "data/truth_labels.csv", "data/grid.txt",   "data/labels.csv",
      "run/labels.csv",     "run/normalization.json", "run/history.csv", "run/checkpoint.bin",
      "run/summary.json",   "eval/predictions.csv",   "eval/confusion.csv",
      "eval/confusion_normalized.csv", "eval/summary.json"};
  std::string differing;
  for (const std::string& rel : artifacts)
    if (file_bytes((a / rel).string()) != file_bytes((b / rel).string()))
      differing += " " + rel;

  const double elapsed = timer.seconds();
  verdict(8, differing.empty() && elapsed < 600.0,
          differing.empty()
              ? "synth -> ingest -> label -> train 5 epochs -> eval repeated with one seed: all " +
                    std::to_string(artifacts.size()) + " artifacts bitwise identical"
              : "artifacts differ between identical runs:" + differing,
          elapsed);
  fs::remove_all(root);
}

// ---- criteria 9 + 10: closed-form shape regressions ----

void criteria_9_10() {
  Timer timer;

  ModelSpec cnn24 = default_spec("cnn");
  ModelSpec cnn168 = default_spec("cnn");
  cnn168.window = 168;
  const bool flatten_ok =
      model_info(cnn24).cnn_flatten == 1152 && model_info(cnn168).cnn_flatten == 8064;

  const Model lstm = build_model(default_spec("lstm"), 909);
  const auto layer = [&lstm](std::initializer_list<const char*> ids) {
    Index total = 0;
    for (const char* id : ids) total += lstm.param(id).value.size();
    return total;
  };
  const Index l1 = layer({"lstm1.wx", "lstm1.wh", "lstm1.b"});
  const Index l2 = layer({"lstm2.wx", "lstm2.wh", "lstm2.b"});
  const Index head = layer({"head.w", "head.b"});
  const bool lstm_ok = l1 == 12600 && l2 == 2440 && head == 44;

  char buf9[160];
  std::snprintf(buf9, sizeof buf9,
                "CNN flatten %lld at L=24 and %lld at L=168 (S=12); LSTM layers %lld/%lld/%lld",
                static_cast<long long>(model_info(cnn24).cnn_flatten),
                static_cast<long long>(model_info(cnn168).cnn_flatten),
                static_cast<long long>(l1), static_cast<long long>(l2),
                static_cast<long long>(head));
  verdict(9, flatten_ok && lstm_ok, buf9, timer.seconds());

  Timer timer10;
  const ModelInfo utime = model_info(default_spec("utime"));
  char buf10[128];
  std::snprintf(buf10, sizeof buf10,
                "U-Time cropped input values %lld, latent temporal extent %lld",
                static_cast<long long>(utime.utime_input_values),
                static_cast<long long>(utime.utime_latent_time));
  verdict(10, utime.utime_input_values == 1920 && utime.utime_latent_time == 1, buf10,
          timer10.seconds());
}

}  // namespace

int main() {
  std::printf("aircast acceptance run\n");
  const Timer total;

  criteria_1_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criteria_9_10();

  std::printf("%d of 10 criteria passed (%.1f s total)\n", 10 - g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
