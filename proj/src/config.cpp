#include "deephedge/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "deephedge/errors.hpp"
#include "deephedge/rng.hpp"

namespace dh {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& what) const {
    if (mark.is_null()) throw ConfigError(source_ + ": " + what);
    throw ConfigError(source_ + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1) + ": " +
                      what);
  }

  // Rejects keys outside `allowed`; returns the mapping (or a null node if absent).
  YAML::Node section(const YAML::Node& parent, const std::string& name, const std::set<std::string>& allowed) const {
    const YAML::Node node = parent[name];
    if (!node) return node;
    if (!node.IsMap()) fail(node.Mark(), "section '" + name + "' must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first.Mark(), "unknown key '" + name + "." + key + "'");
    }
    return node;
  }

  template <class T>
  void get(const YAML::Node& sec, const std::string& path, const char* key, T& out) const {
    if (!sec) return;
    const YAML::Node node = sec[key];
    if (!node) return;
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node.Mark(), "invalid value for '" + path + "." + key + "'");
    }
  }

  template <class T>
  T required(const YAML::Node& sec, const YAML::Node& root, const std::string& path, const char* key) const {
    if (!sec || !sec[key]) fail(sec ? sec.Mark() : root.Mark(), "missing required key '" + path + "." + key + "'");
    T out{};
    get(sec, path, key, out);
    return out;
  }

  ContractRange range(const YAML::Node& node, const std::string& path) const {
    try {
      if (node.IsScalar()) return ContractRange::fixed(node.as<double>());
      if (node.IsSequence() && node.size() == 2) return {node[0].as<double>(), node[1].as<double>()};
    } catch (const YAML::Exception&) {
    }
    fail(node.Mark(), "'" + path + "' must be a number or a [lo, hi] pair");
  }

 private:
  std::string source_;
};

template <class Fn>
void checked(const Reader& reader, const YAML::Node& node, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    reader.fail(node ? node.Mark() : YAML::Mark::null_mark(), e.what());
  }
}

}  // namespace

EvalSetup RunConfig::eval_setup() const {
  EvalSetup s;
  s.market = model;
  s.grid = training.grid;
  s.payoff = training.payoff;
  s.call_strike = eval_call_strike;
  s.n_paths = eval_paths;
  s.block = eval_block;
  s.seed = derived_seed(training.seed_data, SeedPurpose::Evaluation);
  return s;
}

void RunConfig::validate() const {
  model.validate();
  training.validate();
  eval_setup().validate();
  if (simulate_paths < 1) throw std::invalid_argument("simulate.n_paths must be >= 1");
  for (double l : train_lambdas) {
    if (!(l >= 0.0)) throw std::invalid_argument("robustness intensities must be >= 0");
  }
  for (double l : test_lambdas) {
    if (!(l >= 0.0)) throw std::invalid_argument("robustness intensities must be >= 0");
  }
  equinox_g_range.validate("equinox.g_range");
}

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    rd.fail(e.mark, e.msg);
  }
  if (!root.IsMap()) rd.fail(root.Mark(), "configuration must be a mapping of sections");
  const std::set<std::string> sections{"model", "grid", "payoff", "architecture", "loss", "training",
                                       "evaluation", "simulate", "robustness", "equinox", "seeds"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!sections.count(key)) rd.fail(kv.first.Mark(), "unknown section '" + key + "'");
  }

  RunConfig cfg;
  TrainConfig& tr = cfg.training;

  const YAML::Node model = rd.section(root, "model", {"mu", "a", "sigma_circ", "xi", "gamma", "b", "p_circ", "chi",
                                                      "r", "jump_lambda", "jump_kappa"});
  ModelParams& mp = cfg.model;
  mp.jump_kappa = 0.1;
  rd.get(model, "model", "mu", mp.mu);
  rd.get(model, "model", "a", mp.a);
  rd.get(model, "model", "sigma_circ", mp.sigma_circ);
  rd.get(model, "model", "xi", mp.xi);
  rd.get(model, "model", "gamma", mp.gamma);
  rd.get(model, "model", "b", mp.b);
  rd.get(model, "model", "p_circ", mp.p_circ);
  rd.get(model, "model", "chi", mp.chi);
  rd.get(model, "model", "r", mp.r);
  rd.get(model, "model", "jump_lambda", mp.jump_lambda);
  rd.get(model, "model", "jump_kappa", mp.jump_kappa);
  checked(rd, model, [&] { mp.validate(); });

  const YAML::Node grid = rd.section(root, "grid", {"horizon", "steps"});
  double horizon = 2.0;
  rd.get(grid, "grid", "horizon", horizon);
  if (!(std::isfinite(horizon) && horizon > 0.0)) rd.fail(grid["horizon"].Mark(), "grid.horizon must be > 0");
  tr.grid = TimeGrid::with_default_density(horizon);
  rd.get(grid, "grid", "steps", tr.grid.steps);
  checked(rd, grid, [&] { tr.grid.validate(); });

  const YAML::Node payoff = rd.section(root, "payoff", {"kind", "strike", "barrier", "cash", "second_period"});
  const auto kind = rd.required<std::string>(payoff, root, "payoff", "kind");
  checked(rd, payoff["kind"], [&] { tr.payoff.kind = parse_payoff_kind(kind); });
  rd.get(payoff, "payoff", "strike", tr.payoff.strike);
  for (const char* key : {"barrier", "cash", "second_period"}) {
    if (!payoff[key]) continue;
    double v = 0.0;
    rd.get(payoff, "payoff", key, v);
    if (std::string(key) == "barrier") tr.payoff.barrier = v;
    if (std::string(key) == "cash") tr.payoff.cash = v;
    if (std::string(key) == "second_period") tr.payoff.second_period = v;
  }
  checked(rd, payoff, [&] { tr.payoff.validate(); });

  const YAML::Node arch = rd.section(root, "architecture", {"variant", "hidden_layers", "width"});
  const auto variant = rd.required<std::string>(arch, root, "architecture", "variant");
  checked(rd, arch["variant"], [&] { tr.variant = parse_architecture(variant); });
  rd.get(arch, "architecture", "hidden_layers", tr.hidden_layers);
  rd.get(arch, "architecture", "width", tr.width);
  checked(rd, arch, [&] { tr.shape().validate(); });

  const YAML::Node loss = rd.section(root, "loss", {"kind", "lambda_terminal", "sf_weight", "pl_weight"});
  if (loss && loss["kind"]) {
    std::string name;
    rd.get(loss, "loss", "kind", name);
    checked(rd, loss["kind"], [&] { tr.loss.kind = parse_loss_kind(name); });
  }
  rd.get(loss, "loss", "lambda_terminal", tr.loss.lambda_terminal);
  rd.get(loss, "loss", "sf_weight", tr.loss.sf_weight);
  rd.get(loss, "loss", "pl_weight", tr.loss.pl_weight);
  checked(rd, loss, [&] { tr.loss.validate(); });

  const YAML::Node train = rd.section(root, "training", {"epochs", "n_train", "batch_paths", "batch_pairs",
                                                         "learning_rate", "lr_decay", "lr_decay_every",
                                                         "call_strike", "strike", "cash", "random_start"});
  rd.get(train, "training", "epochs", tr.epochs);
  rd.get(train, "training", "n_train", tr.n_train);
  rd.get(train, "training", "batch_paths", tr.batch_paths);
  rd.get(train, "training", "batch_pairs", tr.batch_pairs);
  rd.get(train, "training", "learning_rate", tr.learning_rate);
  rd.get(train, "training", "lr_decay", tr.lr_decay);
  rd.get(train, "training", "lr_decay_every", tr.lr_decay_every);
  rd.get(train, "training", "random_start", tr.random_start);
  if (train && train["call_strike"]) tr.call_strike = rd.range(train["call_strike"], "training.call_strike");
  if (train && train["strike"]) tr.strike = rd.range(train["strike"], "training.strike");
  if (train && train["cash"]) tr.cash = rd.range(train["cash"], "training.cash");

  const YAML::Node eval = rd.section(root, "evaluation", {"n_paths", "call_strike", "block", "histogram"});
  rd.get(eval, "evaluation", "n_paths", cfg.eval_paths);
  rd.get(eval, "evaluation", "call_strike", cfg.eval_call_strike);
  rd.get(eval, "evaluation", "block", cfg.eval_block);
  rd.get(eval, "evaluation", "histogram", cfg.histogram);

  const YAML::Node sim = rd.section(root, "simulate", {"n_paths"});
  rd.get(sim, "simulate", "n_paths", cfg.simulate_paths);

  const YAML::Node rob = rd.section(root, "robustness", {"train_lambdas", "test_lambdas"});
  rd.get(rob, "robustness", "train_lambdas", cfg.train_lambdas);
  rd.get(rob, "robustness", "test_lambdas", cfg.test_lambdas);

  const YAML::Node eq = rd.section(root, "equinox", {"mode", "discount", "g_values", "g_range"});
  if (eq && eq["mode"]) {
    std::string name;
    rd.get(eq, "equinox", "mode", name);
    checked(rd, eq["mode"], [&] { cfg.equinox_mode = parse_equinox_mode(name); });
  }
  if (eq && eq["discount"]) {
    std::string name;
    rd.get(eq, "equinox", "discount", name);
    checked(rd, eq["discount"], [&] { cfg.equinox_discount = parse_equinox_discount(name); });
  }
  rd.get(eq, "equinox", "g_values", cfg.equinox_g_values);
  if (eq && eq["g_range"]) cfg.equinox_g_range = rd.range(eq["g_range"], "equinox.g_range");

  const YAML::Node seeds = rd.section(root, "seeds", {"data", "init"});
  rd.get(seeds, "seeds", "data", tr.seed_data);
  rd.get(seeds, "seeds", "init", tr.seed_init);

  checked(rd, train ? train : root, [&] { cfg.validate(); });
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), file.string());
}

namespace {

void emit_range(YAML::Emitter& out, const ContractRange& r) {
  if (r.is_fixed()) {
    out << r.lo;
  } else {
    out << YAML::Flow << YAML::BeginSeq << r.lo << r.hi << YAML::EndSeq;
  }
}

}  // namespace

std::string effective_config_yaml(const RunConfig& cfg) {
  const TrainConfig& tr = cfg.training;
  const ModelParams& m = cfg.model;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap << YAML::Key << "mu" << YAML::Value << m.mu
      << YAML::Key << "a" << YAML::Value << m.a << YAML::Key << "sigma_circ" << YAML::Value << m.sigma_circ
      << YAML::Key << "xi" << YAML::Value << m.xi << YAML::Key << "gamma" << YAML::Value << m.gamma << YAML::Key
      << "b" << YAML::Value << m.b << YAML::Key << "p_circ" << YAML::Value << m.p_circ << YAML::Key << "chi"
      << YAML::Value << m.chi << YAML::Key << "r" << YAML::Value << m.r << YAML::Key << "jump_lambda"
      << YAML::Value << m.jump_lambda << YAML::Key << "jump_kappa" << YAML::Value << m.jump_kappa << YAML::EndMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "horizon" << YAML::Value
      << tr.grid.t_end << YAML::Key << "steps" << YAML::Value << tr.grid.steps << YAML::EndMap;
  out << YAML::Key << "payoff" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << std::string(to_string(tr.payoff.kind)) << YAML::Key << "strike" << YAML::Value << tr.payoff.strike;
  if (tr.payoff.barrier) out << YAML::Key << "barrier" << YAML::Value << *tr.payoff.barrier;
  if (tr.payoff.cash) out << YAML::Key << "cash" << YAML::Value << *tr.payoff.cash;
  if (tr.payoff.second_period) out << YAML::Key << "second_period" << YAML::Value << *tr.payoff.second_period;
  out << YAML::EndMap;
  out << YAML::Key << "architecture" << YAML::Value << YAML::BeginMap << YAML::Key << "variant" << YAML::Value
      << std::string(to_string(tr.variant)) << YAML::Key << "hidden_layers" << YAML::Value << tr.hidden_layers
      << YAML::Key << "width" << YAML::Value << tr.width << YAML::EndMap;
  out << YAML::Key << "loss" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << std::string(to_string(tr.loss.kind)) << YAML::Key << "lambda_terminal" << YAML::Value
      << tr.loss.lambda_terminal << YAML::Key << "sf_weight" << YAML::Value << tr.loss.sf_weight << YAML::Key
      << "pl_weight" << YAML::Value << tr.loss.pl_weight << YAML::EndMap;
  out << YAML::Key << "training" << YAML::Value << YAML::BeginMap << YAML::Key << "epochs" << YAML::Value
      << tr.epochs << YAML::Key << "n_train" << YAML::Value << static_cast<long long>(tr.n_train) << YAML::Key
      << "batch_paths" << YAML::Value << tr.batch_paths << YAML::Key << "batch_pairs" << YAML::Value
      << tr.batch_pairs << YAML::Key << "learning_rate" << YAML::Value << tr.learning_rate << YAML::Key
      << "lr_decay" << YAML::Value << tr.lr_decay << YAML::Key << "lr_decay_every" << YAML::Value
      << tr.lr_decay_every << YAML::Key << "call_strike" << YAML::Value;
  emit_range(out, tr.call_strike);
  out << YAML::Key << "strike" << YAML::Value;
  emit_range(out, tr.strike_range());
  if (tr.payoff.kind == PayoffKind::EquinoxFull || tr.cash) {
    out << YAML::Key << "cash" << YAML::Value;
    emit_range(out, tr.cash_range());
  }
  out << YAML::Key << "random_start" << YAML::Value << tr.random_start << YAML::EndMap;
  out << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap << YAML::Key << "n_paths" << YAML::Value
      << static_cast<long long>(cfg.eval_paths) << YAML::Key << "call_strike" << YAML::Value
      << cfg.eval_call_strike << YAML::Key << "block" << YAML::Value << static_cast<long long>(cfg.eval_block)
      << YAML::Key << "histogram" << YAML::Value << cfg.histogram << YAML::EndMap;
  out << YAML::Key << "simulate" << YAML::Value << YAML::BeginMap << YAML::Key << "n_paths" << YAML::Value
      << static_cast<long long>(cfg.simulate_paths) << YAML::EndMap;
  out << YAML::Key << "robustness" << YAML::Value << YAML::BeginMap << YAML::Key << "train_lambdas"
      << YAML::Value << YAML::Flow << cfg.train_lambdas << YAML::Key << "test_lambdas" << YAML::Value
      << YAML::Flow << cfg.test_lambdas << YAML::EndMap;
  out << YAML::Key << "equinox" << YAML::Value << YAML::BeginMap << YAML::Key << "mode" << YAML::Value
      << std::string(to_string(cfg.equinox_mode)) << YAML::Key << "discount" << YAML::Value
      << std::string(to_string(cfg.equinox_discount)) << YAML::Key << "g_values" << YAML::Value << YAML::Flow
      << cfg.equinox_g_values << YAML::Key << "g_range" << YAML::Value;
  emit_range(out, cfg.equinox_g_range);
  out << YAML::EndMap;
  out << YAML::Key << "seeds" << YAML::Value << YAML::BeginMap << YAML::Key << "data" << YAML::Value
      << tr.seed_data << YAML::Key << "init" << YAML::Value << tr.seed_init << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace dh
