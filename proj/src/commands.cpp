#include "deephedge/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "deephedge/analytics.hpp"
#include "deephedge/checkpoint.hpp"
#include "deephedge/errors.hpp"
#include "deephedge/rng.hpp"

namespace dh {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& file, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(file, mode);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

template <class Writer>
void write_file(const fs::path& file, Writer&& writer) {
  auto out = open_output(file);
  writer(out);
}

void print_stats(std::ostream& log, const PnLReport& r) {
  const PnLStats& s = r.stats;
  log << std::fixed << std::setprecision(3) << r.label << ": mean " << s.mean << "% sd " << s.sd << "% q01 " << s.q01
      << "% q10 " << s.q10 << "% q90 " << s.q90 << "% q99 " << s.q99 << "% (of " << std::setprecision(6)
      << r.normalization << ")\n";
  log.unsetf(std::ios::floatfield);
}

void write_report(const fs::path& dir, const std::string& prefix, const PnLReport& report, bool histogram) {
  write_file(dir / (prefix + "pnl_samples.csv"), [&](std::ostream& o) { write_pnl_samples_csv(report, o); });
  write_file(dir / (prefix + "pnl_stats.csv"), [&](std::ostream& o) { write_pnl_stats_csv(report, o); });
  if (histogram) write_file(dir / (prefix + "histogram.csv"), [&](std::ostream& o) { write_histogram_csv(report, o); });
}

void write_log(const fs::path& file, const std::vector<LogRow>& rows, bool append) {
  const bool header = !append || !fs::exists(file);
  auto out = open_output(file, append ? std::ios::app : std::ios::out);
  out << std::setprecision(17);
  if (header) out << "epoch,loss,sf,pl,terminal\n";
  for (const auto& r : rows) out << r.epoch << ',' << r.loss << ',' << r.sf << ',' << r.pl << ',' << r.terminal << '\n';
}

std::string number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::shared_ptr<PricedModel> load_model(const fs::path& file) { return load_checkpoint(file).model; }

void require_vanilla(const RunConfig& cfg, const char* command) {
  if (cfg.training.payoff.is_equinox()) {
    throw ConfigError(std::string(command) + ": Equinox payoffs are handled by the equinox command");
  }
}

TrainResult train_logged(const TrainConfig& cfg, const HedgingDataset& data, const ModelParams& market,
                         std::shared_ptr<const PricedModel> call_model, const Resume* resume, std::ostream& log,
                         const std::string& name) {
  const long every = std::max(1L, cfg.epochs / 10);
  return train(cfg, data, market, std::move(call_model), resume, [&](const LogRow& r) {
    if (r.epoch % every == 0 || r.epoch == cfg.epochs) {
      log << name << " epoch " << r.epoch << " loss " << r.loss << " sf " << r.sf << " pl " << r.pl << " terminal "
          << r.terminal << '\n';
    }
  });
}

}  // namespace

RunConfig prepare_run(const CommandOptions& opts, std::string& digest) {
  if (opts.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_run_config(opts.config);
  if (opts.seed_data) cfg.training.seed_data = *opts.seed_data;
  if (opts.seed_init) cfg.training.seed_init = *opts.seed_init;
  fs::create_directories(opts.out_dir);
  const std::string yaml = effective_config_yaml(cfg);
  digest = fnv1a_hex(yaml);
  write_file(opts.out_dir / "effective_config.yaml", [&](std::ostream& o) { o << yaml; });
  return cfg;
}

void cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  std::string digest;
  const RunConfig cfg = prepare_run(opts, digest);
  const TrainConfig& tr = cfg.training;
  PathSet paths = simulate_paths(cfg.model, tr.grid, cfg.simulate_paths, MarketState::defaults_for(cfg.model),
                                 derived_seed(tr.seed_data, SeedPurpose::TrainingPaths));
  paths = overlay_tradable_call(std::move(paths), cfg.eval_call_strike, tr.call_maturity());
  write_file(opts.out_dir / "paths.csv", [&](std::ostream& o) { write_paths_csv(paths, o); });
  log << "wrote " << paths.size() << " paths x " << tr.grid.steps + 1 << " nodes to "
      << (opts.out_dir / "paths.csv").string() << '\n';
}

void cmd_train(const CommandOptions& opts, std::ostream& log) {
  std::string digest;
  const RunConfig cfg = prepare_run(opts, digest);
  require_vanilla(cfg, "train");
  std::optional<Resume> resume;
  if (!opts.checkpoints.empty()) {
    Checkpoint ck = load_checkpoint(opts.checkpoints.front());
    if (!ck.progress) throw ConfigError(opts.checkpoints.front().string() + ": checkpoint has no optimizer state");
    if (ck.model->payoff().kind != cfg.training.payoff.kind || ck.model->architecture() != cfg.training.variant) {
      throw ConfigError(opts.checkpoints.front().string() + ": checkpoint payoff or variant differs from the config");
    }
    resume = Resume{ck.model->network(), *ck.progress};
    log << "resuming after epoch " << ck.progress->epoch << '\n';
  }
  const HedgingDataset data = make_dataset(cfg.training, cfg.model);
  const TrainResult result =
      train_logged(cfg.training, data, cfg.model, nullptr, resume ? &*resume : nullptr, log, "train");
  const CheckpointMeta meta{digest, cfg.training.seed_data, cfg.training.seed_init};
  save_checkpoint(opts.out_dir / "checkpoint.json", *result.model, meta, &result.progress);
  write_log(opts.out_dir / "training_log.csv", result.log, resume.has_value());
  if (!result.log.empty()) {
    const LogRow& last = result.log.back();
    log << "final loss " << last.loss << " sf " << last.sf << " pl " << last.pl << " terminal " << last.terminal
        << '\n';
  }
  log << "checkpoint: " << (opts.out_dir / "checkpoint.json").string() << '\n';
}

void cmd_evaluate(const CommandOptions& opts, std::ostream& log) {
  std::string digest;
  const RunConfig cfg = prepare_run(opts, digest);
  require_vanilla(cfg, "evaluate");
  if (opts.checkpoints.empty()) throw ConfigError("evaluate: --checkpoint is required");
  const auto model = load_model(opts.checkpoints.front());
  if (model->payoff().kind != cfg.training.payoff.kind) {
    throw ConfigError("evaluate: checkpoint prices '" + std::string(to_string(model->payoff().kind)) +
                      "' but the config payoff is '" + std::string(to_string(cfg.training.payoff.kind)) + "'");
  }
  const Evaluation e = evaluate(*model, cfg.eval_setup());
  write_report(opts.out_dir, "", e.network, cfg.histogram);
  write_report(opts.out_dir, "benchmark_", e.benchmark, cfg.histogram);
  print_stats(log, e.network);
  print_stats(log, e.benchmark);
}

void cmd_robustness(const CommandOptions& opts, std::ostream& log) {
  std::string digest;
  const RunConfig cfg = prepare_run(opts, digest);
  require_vanilla(cfg, "robustness");
  std::vector<std::pair<double, std::shared_ptr<const PricedModel>>> models;
  for (std::size_t k = 0; k < cfg.train_lambdas.size(); ++k) {
    const double lambda = cfg.train_lambdas[k];
    if (k >= opts.checkpoints.size()) {
      throw ConfigError("robustness: missing checkpoint for train lambda " + number(lambda));
    }
    if (!fs::exists(opts.checkpoints[k])) {
      throw ConfigError("robustness: checkpoint " + opts.checkpoints[k].string() + " for train lambda " +
                        number(lambda) + " not found");
    }
    models.emplace_back(lambda, load_model(opts.checkpoints[k]));
  }
  const auto cells = robustness_grid(models, cfg.test_lambdas, cfg.eval_setup());
  write_file(opts.out_dir / "robustness_grid.csv", [&](std::ostream& o) { write_robustness_csv(cells, o); });
  for (const auto& c : cells) {
    log << "train " << c.train_lambda << " test " << c.test_lambda << ": mean " << c.stats.mean << "% sd "
        << c.stats.sd << "%\n";
  }
}

void cmd_equinox(const CommandOptions& opts, std::ostream& log) {
  std::string digest;
  RunConfig cfg = prepare_run(opts, digest);
  if (opts.mode) {
    try {
      cfg.equinox_mode = parse_equinox_mode(*opts.mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  TrainConfig& tr = cfg.training;
  if (tr.payoff.kind != PayoffKind::EquinoxFull) throw ConfigError("equinox: payoff.kind must be equinox_full");
  const CheckpointMeta meta{digest, tr.seed_data, tr.seed_init};
  const fs::path& dir = opts.out_dir;

  std::shared_ptr<const PricedModel> call;
  if (!opts.checkpoints.empty()) {
    call = load_model(opts.checkpoints.front());
    if (call->payoff().kind != PayoffKind::Call) throw ConfigError("equinox: --checkpoint must hold a call model");
  } else {
    const TrainConfig call_cfg = equinox_call_config(tr);
    const TrainResult res = train_logged(call_cfg, make_dataset(call_cfg, cfg.model), cfg.model, nullptr, nullptr,
                                         log, "call");
    write_log(dir / "call_training_log.csv", res.log, false);
    call = res.model;
  }
  save_checkpoint(dir / "call.json", *call, meta);

  EquinoxComposition comp;
  comp.mode = cfg.equinox_mode;
  comp.discount = cfg.equinox_discount;
  comp.r = cfg.model.r;
  comp.call = call;
  EquinoxDescriptor desc{comp.mode, comp.discount, comp.r, "call.json", {}, {}, {}};
  if (comp.mode == EquinoxMode::TwoNets) {
    TrainConfig barrier_cfg = tr;
    barrier_cfg.payoff = PayoffSpec::equinox_barrier_call(tr.payoff.strike, *tr.payoff.barrier, *tr.payoff.second_period);
    barrier_cfg.cash.reset();
    const TrainResult barrier = train_logged(barrier_cfg, make_dataset(barrier_cfg, cfg.model, call.get()), cfg.model,
                                             call, nullptr, log, "barrier_call");
    const TrainConfig digital_cfg = equinox_digital_config(tr);
    const TrainResult digital = train_logged(digital_cfg, make_dataset(digital_cfg, cfg.model), cfg.model, nullptr,
                                             nullptr, log, "digital");
    save_checkpoint(dir / "barrier_call.json", *barrier.model, meta, &barrier.progress);
    save_checkpoint(dir / "digital.json", *digital.model, meta, &digital.progress);
    write_log(dir / "barrier_call_training_log.csv", barrier.log, false);
    write_log(dir / "digital_training_log.csv", digital.log, false);
    comp.barrier_call = barrier.model;
    comp.digital = digital.model;
    desc.barrier_call = "barrier_call.json";
    desc.digital = "digital.json";
  } else {
    TrainConfig single_cfg = tr;
    if (!single_cfg.cash) single_cfg.cash = cfg.equinox_g_range;
    const TrainResult single = train_logged(single_cfg, make_dataset(single_cfg, cfg.model, call.get()), cfg.model,
                                            call, nullptr, log, "equinox");
    save_checkpoint(dir / "equinox_single.json", *single.model, meta, &single.progress);
    write_log(dir / "equinox_training_log.csv", single.log, false);
    comp.single = single.model;
    desc.single = "equinox_single.json";
  }
  save_equinox_descriptor(dir / "equinox.json", desc);

  // G sweep on paired paths; each report is normalized by the composed price at t = 0.
  auto out = open_output(dir / "equinox_g_sweep.csv");
  out << std::setprecision(17) << "g,normalization,mean,sd,q01,q10,q50,q90,q99\n";
  const MarketState init = MarketState::defaults_for(cfg.model);
  for (double g : cfg.equinox_g_values) {
    EvalSetup setup = cfg.eval_setup();
    setup.payoff.cash = g;
    const ContractTerms terms = setup.terms();
    const double c0 = bs_call_price({tr.call_maturity(), init.x, std::max(init.sigma, 0.0), cfg.model.r,
                                     cfg.eval_call_strike});
    const double price0 = equinox_price(comp, 0.0, init.x, c0, terms);
    if (!(price0 > 0.0)) throw NumericError("equinox: composed price at t = 0 is not positive");
    const PnLReport report = evaluate_equinox(comp, setup, price0, "equinox G=" + number(g));
    const PnLStats& s = report.stats;
    out << g << ',' << price0 << ',' << s.mean << ',' << s.sd << ',' << s.q01 << ',' << s.q10 << ',' << s.q50 << ','
        << s.q90 << ',' << s.q99 << '\n';
    print_stats(log, report);
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep hedging engine: simulate, train, evaluate, robustness, equinox"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::vector<std::string> checkpoints;
  std::string out_dir = ".";
  std::uint64_t seed_data = 0, seed_init = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "YAML configuration file")->required();
    sub->add_option("--out-dir", out_dir, "Output directory");
    sub->add_option("--seed-data", seed_data, "Override seeds.data");
    sub->add_option("--seed-init", seed_init, "Override seeds.init");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate market paths to paths.csv");
  add_common(simulate);
  CLI::App* train_cmd = app.add_subcommand("train", "Train a network; writes checkpoint.json and training_log.csv");
  add_common(train_cmd);
  train_cmd->add_option("--checkpoint", checkpoints, "Resume from this checkpoint");
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Out-of-sample P&L of a checkpoint and the benchmark");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--checkpoint", checkpoints, "Trained checkpoint")->required();
  CLI::App* robust = app.add_subcommand("robustness", "Cross-intensity P&L grid");
  add_common(robust);
  robust->add_option("--checkpoint", checkpoints, "One checkpoint per training intensity, in config order");
  CLI::App* equinox = app.add_subcommand("equinox", "Train and evaluate the Equinox pipeline");
  add_common(equinox);
  equinox->add_option("--checkpoint", checkpoints, "Pre-trained call model over [0, T + R]");
  std::string mode;
  equinox->add_option("--mode", mode, "two_nets or single");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  opts.out_dir = out_dir;
  if (sub->count("--seed-data") > 0) opts.seed_data = seed_data;
  if (sub->count("--seed-init") > 0) opts.seed_init = seed_init;
  for (const auto& c : checkpoints) opts.checkpoints.emplace_back(c);
  if (!mode.empty()) opts.mode = mode;

  try {
    if (sub == simulate) cmd_simulate(opts, out);
    if (sub == train_cmd) cmd_train(opts, out);
    if (sub == evaluate_cmd) cmd_evaluate(opts, out);
    if (sub == robust) cmd_robustness(opts, out);
    if (sub == equinox) cmd_equinox(opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what();
    if (e.epoch()) err << " [epoch " << *e.epoch() << "]";
    if (e.batch_index()) err << " [batch index " << *e.batch_index() << "]";
    err << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dh
