#include "aircast/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "aircast/gradcheck.hpp"
#include "aircast/rng.hpp"

namespace aircast {

namespace {

constexpr std::uint64_t kGradBatchTag = 0x67626174ULL;  // "gbat"

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw InvalidArgument("cannot create output directory " + cfg.out + ": " + ec.message());
}

// Whole civil days covering every record.
void record_span(const std::vector<RawRecord>& records, Hour& start, Hour& end) {
  require(!records.empty(), "input contains no records");
  Hour lo = records.front().timestamp;
  Hour hi = records.front().timestamp;
  for (const RawRecord& r : records) {
    lo = std::min(lo, r.timestamp);
    hi = std::max(hi, r.timestamp);
  }
  start = day_of(lo).start();
  end = (day_of(hi) + 1).start();
}

struct IngestedGrid {
  HourlyGrid imputed;
  std::int64_t records = 0;
  std::int64_t duplicates = 0;
  std::int64_t missing = 0;  // cells imputation had to fill
};

IngestedGrid ingest_csv(const std::string& path) {
  const std::vector<RawRecord> records = read_csv(path);
  Hour start, end;
  record_span(records, start, end);
  BuildResult built = build_grid(records, stations_in(records), start, end);
  IngestedGrid out;
  out.records = static_cast<std::int64_t>(records.size());
  out.duplicates = built.duplicates;
  out.missing = built.grid.mask.size() - built.grid.mask.count();
  out.imputed = impute_monthly_mean(built.grid);
  return out;
}

// `label` accepts either raw records or a previously saved grid.
HourlyGrid grid_from_input(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ParseError("cannot open input file: " + path);
  std::string head(13, '\0');
  probe.read(head.data(), static_cast<std::streamsize>(head.size()));
  probe.close();
  if (head.rfind("aircast-grid,", 0) == 0) return load_grid(path);
  return ingest_csv(path).imputed;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

nlohmann::json economy_json(const EconomicReport& e) {
  nlohmann::json j;
  j["actual_total"] = e.actual_total;
  j["predicted_total"] = e.predicted_total;
  j["overcharge"] = e.overcharge;
  j["undercharge"] = e.undercharge;
  j["fairness_gap"] = e.fairness_gap;
  return j;
}

nlohmann::json taxonomy_json(const ErrorTaxonomy& t) {
  nlohmann::json j;
  j["class_accuracy"] = t.class_accuracy;
  j["class_adjacent"] = t.class_adjacent;
  j["class_non_adjacent"] = t.class_non_adjacent;
  j["class_count"] = t.class_count;
  j["adjacent"] = t.adjacent;
  j["non_adjacent"] = t.non_adjacent;
  j["false_positive"] = t.false_positive;
  j["false_negative"] = t.false_negative;
  j["total"] = t.total;
  return j;
}

}  // namespace

std::string RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? join(out, artifacts::kCheckpoint) : checkpoint;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config file: " + std::string(e.what()));
  }

  RunConfig cfg;
  try {
    cfg.input = j.value("input", cfg.input);
    cfg.out = j.value("out", cfg.out);
    cfg.checkpoint = j.value("checkpoint", cfg.checkpoint);
    cfg.rule = j.value("rule", cfg.rule);
    cfg.block = block_from_index(j.value("block", static_cast<int>(cfg.block)));
    cfg.window = j.value("window", cfg.window);
    cfg.model = j.value("model", cfg.model);
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("split")) {
      const nlohmann::json& s = j.at("split");
      const auto range = [&s](const char* key, YearRange fallback) {
        if (!s.contains(key)) return fallback;
        const auto pair = s.at(key).get<std::array<int, 2>>();
        return YearRange{pair[0], pair[1]};
      };
      cfg.split.train = range("train", cfg.split.train);
      cfg.split.validation = range("validation", cfg.split.validation);
      cfg.split.test = range("test", cfg.split.test);
    }

    if (j.contains("train")) {
      const nlohmann::json& t = j.at("train");
      cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
      cfg.train.beta1 = t.value("beta1", cfg.train.beta1);
      cfg.train.beta2 = t.value("beta2", cfg.train.beta2);
      cfg.train.epsilon = t.value("epsilon", cfg.train.epsilon);
      cfg.train.patience = t.value("patience", cfg.train.patience);
      cfg.train.target_train_accuracy =
          t.value("target_train_accuracy", cfg.train.target_train_accuracy);
    }

    if (j.contains("tariff")) {
      const nlohmann::json& t = j.at("tariff");
      cfg.tariff.block_hours = t.value("block_hours", cfg.tariff.block_hours);
      cfg.tariff.price_per_hour = t.value("prices", cfg.tariff.price_per_hour);
    }

    if (j.contains("synth")) {
      const nlohmann::json& s = j.at("synth");
      cfg.synth.stations = s.value("stations", cfg.synth.stations);
      cfg.synth.days = s.value("days", cfg.synth.days);
      cfg.synth.start_year = s.value("start_year", cfg.synth.start_year);
      cfg.synth.signal = s.value("signal", cfg.synth.signal);
      if (s.contains("level_weights"))
        cfg.synth.level_weights = s.at("level_weights").get<std::array<double, kNumLevels>>();
      if (s.contains("episodes")) {
        for (const nlohmann::json& e : s.at("episodes")) {
          EpisodeSpec ep;
          ep.day_offset = e.at("day").get<std::int64_t>();
          ep.block = block_from_index(e.at("block").get<int>());
          ep.level = level_from_index(e.at("level").get<int>());
          cfg.synth.episodes.push_back(ep);
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config file: " + std::string(e.what()));
  }
  return cfg;
}

IngestSummary run_ingest(const RunConfig& cfg, std::ostream& log) {
  require(!cfg.input.empty(), "ingest needs an input CSV (--input)");
  ensure_out_dir(cfg);
  const IngestedGrid ingested = ingest_csv(cfg.input);
  save_grid(join(cfg.out, artifacts::kGrid), ingested.imputed);

  IngestSummary summary;
  summary.stations = ingested.imputed.stations();
  summary.hours = ingested.imputed.hours();
  summary.records = ingested.records;
  summary.duplicates = ingested.duplicates;
  summary.imputed = ingested.missing;
  log << "ingest: " << summary.stations << " stations, " << summary.hours << " hours, "
      << summary.records << " records, " << summary.duplicates << " duplicates, "
      << summary.imputed << " imputed cells\n";
  return summary;
}

LabelSummary run_label(const RunConfig& cfg, std::ostream& log) {
  require(!cfg.input.empty(), "label needs an input file (--input)");
  ensure_out_dir(cfg);
  const HourlyGrid grid = grid_from_input(cfg.input);
  const RuleSpec rule = RuleSpec::rule(cfg.rule);
  const std::vector<BlockLabel> labels = label_dataset(grid, rule, {Block::II, Block::III});
  save_labels(join(cfg.out, artifacts::kLabels), labels, rule.id);

  LabelSummary summary;
  summary.labels = static_cast<std::int64_t>(labels.size());
  for (const BlockLabel& l : labels)
    ++summary.by_level[static_cast<std::size_t>(level_index(l.level))];
  log << "label: " << summary.labels << " blocks (";
  for (int i = 0; i < kNumLevels; ++i)
    log << (i ? ", " : "") << to_string(level_from_index(i)) << ' '
        << summary.by_level[static_cast<std::size_t>(i)];
  log << ")\n";
  return summary;
}

TrainSummary run_train(const RunConfig& cfg, std::ostream& log) {
  require(!cfg.input.empty(), "train needs an input CSV (--input)");
  ensure_out_dir(cfg);
  cfg.split.validate();

  const IngestedGrid ingested = ingest_csv(cfg.input);
  const HourlyGrid& grid = ingested.imputed;
  const RuleSpec rule = RuleSpec::rule(cfg.rule);

  const std::vector<BlockLabel> labels = label_dataset(grid, rule, {cfg.block});
  save_labels(join(cfg.out, artifacts::kLabels), labels, rule.id);

  const NormalizationParams norm =
      fit_minmax(grid, year_start(cfg.split.train.first), year_start(cfg.split.train.last + 1));
  save_normalization(join(cfg.out, artifacts::kNormalization), norm);
  const HourlyGrid scaled = apply_minmax(grid, norm);

  const WindowResult windows = make_windows(scaled, labels, cfg.window);
  const SplitResult split = split_by_year(windows.samples, cfg.split);
  const BalancedDataset balanced = balance(split.train, cfg.seed);
  log << "train: " << balanced.samples.size() << " train (" << split.train.size()
      << " before balancing) / " << split.validation.size() << " val / " << split.test.size()
      << " test samples, " << windows.dropped << " windows dropped\n";

  ModelSpec spec;
  spec.architecture = cfg.model;
  spec.window = cfg.window;
  spec.stations = grid.stations();
  Model model = build_model(spec, cfg.seed);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainResult result = train_model(model, balanced.samples, split.validation, tc);
  save_history(join(cfg.out, artifacts::kHistory), result.history);
  for (const EpochStats& e : result.history)
    log << "train: epoch " << e.epoch << " train_loss " << e.train_loss << " val_loss "
        << e.val_loss << " val_acc " << e.val_accuracy << "\n";

  save_checkpoint(join(cfg.out, artifacts::kCheckpoint),
                  make_checkpoint(model, rule, norm, cfg.block, cfg.seed));

  const EvalStats val = evaluate_model(model, split.validation);
  const EvalStats test = evaluate_model(model, split.test);

  nlohmann::json j;
  j["command"] = "train";
  j["architecture"] = spec.architecture;
  j["window"] = spec.window;
  j["stations"] = spec.stations;
  j["block"] = static_cast<int>(cfg.block);
  j["rule"] = rule.id;
  j["seed"] = cfg.seed;
  j["samples"]["train_balanced"] = balanced.samples.size();
  j["samples"]["train"] = split.train.size();
  j["samples"]["validation"] = split.validation.size();
  j["samples"]["test"] = split.test.size();
  j["samples"]["dropped_windows"] = windows.dropped;
  j["balance"]["before"] = balanced.before;
  j["balance"]["after"] = balanced.after;
  j["epochs_run"] = result.history.size();
  j["best_epoch"] = result.best_epoch;
  j["stopped_early"] = result.stopped_early;
  j["reached_target"] = result.reached_target;
  j["validation"]["loss"] = val.mean_loss;
  j["validation"]["accuracy"] = val.accuracy;
  j["test"]["loss"] = test.mean_loss;
  j["test"]["accuracy"] = test.accuracy;
  write_text(join(cfg.out, artifacts::kSummary), j.dump(2) + "\n");

  TrainSummary summary;
  summary.epochs_run = static_cast<Index>(result.history.size());
  summary.best_epoch = result.best_epoch;
  summary.val_accuracy = val.accuracy;
  summary.test_accuracy = test.accuracy;
  log << "train: " << summary.epochs_run << " epochs, best " << summary.best_epoch
      << ", val_acc " << summary.val_accuracy << ", test_acc " << summary.test_accuracy << "\n";
  return summary;
}

EvalSummary run_eval(const RunConfig& cfg, std::ostream& log) {
  require(!cfg.input.empty(), "eval needs an input CSV (--input)");
  ensure_out_dir(cfg);
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path());
  const Model model = restore_model(ckpt);

  const HourlyGrid grid = grid_from_input(cfg.input);
  const std::vector<BlockLabel> labels = label_dataset(grid, ckpt.rule, {ckpt.block});
  const HourlyGrid scaled = apply_minmax(grid, ckpt.normalization);
  const WindowResult windows = make_windows(scaled, labels, ckpt.model.window);
  require(!windows.samples.empty(), "eval: no sample has full window coverage");

  const EvalStats stats = evaluate_model(model, windows.samples);
  std::vector<AlertLevel> actual;
  actual.reserve(windows.samples.size());
  for (const Sample& s : windows.samples) actual.push_back(s.label);

  {
    std::ofstream out(join(cfg.out, artifacts::kPredictions), std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + join(cfg.out, artifacts::kPredictions));
    out << "date,block,actual,predicted\n";
    for (std::size_t i = 0; i < windows.samples.size(); ++i) {
      const Sample& s = windows.samples[i];
      out << s.day.iso() << ',' << static_cast<int>(s.block) << ',' << level_index(s.label)
          << ',' << level_index(stats.predictions[i]) << '\n';
    }
    if (!out) throw ParseError("write failed: " + join(cfg.out, artifacts::kPredictions));
  }

  const ConfusionMatrix cm = confusion_matrix(actual, stats.predictions);
  write_confusion_csv(join(cfg.out, artifacts::kConfusion), cm);
  write_confusion_normalized_csv(join(cfg.out, artifacts::kConfusionNormalized), cm);
  const ErrorTaxonomy taxonomy = error_taxonomy(cm);
  const EconomicReport economy = economic_impact(actual, stats.predictions, cfg.tariff);

  nlohmann::json j;
  j["command"] = "eval";
  j["samples"] = windows.samples.size();
  j["accuracy"] = stats.accuracy;
  j["mean_loss"] = stats.mean_loss;
  j["taxonomy"] = taxonomy_json(taxonomy);
  j["economy"] = economy_json(economy);
  write_text(join(cfg.out, artifacts::kSummary), j.dump(2) + "\n");

  EvalSummary summary;
  summary.samples = static_cast<std::int64_t>(windows.samples.size());
  summary.accuracy = stats.accuracy;
  summary.economy = economy;
  log << "eval: " << summary.samples << " samples, accuracy " << summary.accuracy
      << ", fairness gap " << economy.fairness_gap << " EUR\n";
  return summary;
}

bool run_gradcheck(const RunConfig& cfg, std::ostream& log) {
  ModelSpec spec;
  spec.architecture = cfg.model;
  spec.window = cfg.window;
  spec.stations = cfg.synth.stations;
  Model model = build_model(spec, cfg.seed);

  Rng rng(mix_seed({cfg.seed, kGradBatchTag}));
  std::vector<Sample> batch;
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.window = Matrix(spec.window, spec.stations);
    for (Index r = 0; r < spec.window; ++r)
      for (Index c = 0; c < spec.stations; ++c) s.window(r, c) = rng.uniform();
    s.label = level_from_index(i % kNumLevels);
    batch.push_back(std::move(s));
  }

  GradCheckConfig gc;
  gc.seed = cfg.seed;
  const GradCheckReport report = check_gradients(model, batch, gc);
  log << "gradcheck " << spec.architecture << ": max rel error " << report.max_rel_error
      << " over " << report.coords.size() << "/" << report.total_coords
      << " coordinates (tolerance " << report.tolerance << ") -> "
      << (report.passed ? "ok" : "FAILED") << "\n";
  if (!report.passed && report.worst() != nullptr) {
    const GradCheckCoord* w = report.worst();
    log << "gradcheck worst: " << w->param_id << "[" << w->coord << "] analytic " << w->analytic
        << " numeric " << w->numeric << "\n";
  }
  return report.passed;
}

SynthSummary run_synth(const RunConfig& cfg, std::ostream& log) {
  ensure_out_dir(cfg);
  SynthSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  spec.rule = RuleSpec::rule(cfg.rule);
  const SynthResult result = generate_synthetic(spec);

  write_csv(join(cfg.out, artifacts::kSynthetic), records_from_grid(result.grid));
  save_labels(join(cfg.out, artifacts::kTruthLabels), result.intended, spec.rule.id);

  SynthSummary summary;
  summary.stations = result.grid.stations();
  summary.hours = result.grid.hours();
  summary.labels = static_cast<std::int64_t>(result.intended.size());
  log << "synth: " << summary.stations << " stations, " << summary.hours << " hours, "
      << summary.labels << " intended labels\n";
  return summary;
}

}  // namespace aircast
