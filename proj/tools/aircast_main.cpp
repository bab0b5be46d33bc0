#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aircast/pipeline.hpp"

// Exit codes: 0 success, 1 verification failure (numeric blowup, failed
// gradient check), 2 bad usage or malformed input.

int main(int argc, char** argv) {
  CLI::App app{"aircast: NO2 alert-level forecasting over station-hour grids"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, input, out_dir, model, checkpoint;
  int rule = 1;
  int block = 2;
  std::int64_t window = 24;
  std::uint64_t seed = 1;

  auto* opt_config = app.add_option("--config", config_path, "JSON config file");
  auto* opt_input =
      app.add_option("--input", input, "input records CSV (label also accepts a saved grid)");
  auto* opt_out = app.add_option("--out", out_dir, "output directory for artifacts");
  auto* opt_rule = app.add_option("--rule", rule, "alert rule, 1 or 2")->check(CLI::Range(1, 2));
  auto* opt_block =
      app.add_option("--block", block, "six-hour day block, 1..4")->check(CLI::Range(1, 4));
  auto* opt_window = app.add_option("--window", window, "window length in hours");
  auto* opt_model = app.add_option("--model", model, "architecture: lstm, cnn, or utime");
  auto* opt_seed = app.add_option("--seed", seed, "run seed");
  auto* opt_ckpt = app.add_option("--checkpoint", checkpoint, "checkpoint path (eval)");

  CLI::App* c_ingest = app.add_subcommand("ingest", "records CSV -> imputed station-hour grid");
  CLI::App* c_label = app.add_subcommand("label", "grid -> alert labels for blocks II and III");
  CLI::App* c_train =
      app.add_subcommand("train", "full pipeline: ingest, label, window, train, checkpoint");
  CLI::App* c_eval = app.add_subcommand("eval", "apply a checkpoint to new data");
  CLI::App* c_grad =
      app.add_subcommand("gradcheck", "verify model gradients against central differences");
  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic records CSV with labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    aircast::RunConfig cfg;
    if (opt_config->count()) cfg = aircast::load_run_config(config_path);
    if (opt_input->count()) cfg.input = input;
    if (opt_out->count()) cfg.out = out_dir;
    if (opt_rule->count()) cfg.rule = rule;
    if (opt_block->count()) cfg.block = aircast::block_from_index(block);
    if (opt_window->count()) cfg.window = window;
    if (opt_model->count()) cfg.model = model;
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_ckpt->count()) cfg.checkpoint = checkpoint;

    if (app.got_subcommand(c_ingest)) {
      aircast::run_ingest(cfg, std::cout);
    } else if (app.got_subcommand(c_label)) {
      aircast::run_label(cfg, std::cout);
    } else if (app.got_subcommand(c_train)) {
      aircast::run_train(cfg, std::cout);
    } else if (app.got_subcommand(c_eval)) {
      aircast::run_eval(cfg, std::cout);
    } else if (app.got_subcommand(c_grad)) {
      if (!aircast::run_gradcheck(cfg, std::cout)) return 1;
    } else if (app.got_subcommand(c_synth)) {
      aircast::run_synth(cfg, std::cout);
    }
    return 0;
  } catch (const aircast::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const aircast::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const aircast::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
