#include "deephedge/training.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "deephedge/errors.hpp"
#include "deephedge/grad_tape.hpp"
#include "deephedge/rng.hpp"

namespace dh {

namespace {

double draw(const ContractRange& range, Xoshiro256pp& rng) {
  if (range.is_fixed()) return range.lo;
  return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
}

LossBatch sample_batch(const TrainConfig& cfg, const HedgingDataset& data, Xoshiro256pp& rng) {
  const Eigen::Index n = data.size();
  const int m = data.steps();
  std::uniform_int_distribution<Eigen::Index> pick_path(0, n - 1);
  if (cfg.loss.kind == LossKind::SelfFinancing) {
    std::vector<std::pair<Eigen::Index, int>> pairs(static_cast<std::size_t>(cfg.batch_pairs));
    for (auto& pair : pairs) {
      const Eigen::Index i = pick_path(rng);
      pair = {i, std::uniform_int_distribution<int>(data.start(i), m - 1)(rng)};
    }
    return pair_batch(data, pairs);
  }
  std::vector<Eigen::Index> paths(static_cast<std::size_t>(cfg.batch_paths));
  for (auto& i : paths) i = pick_path(rng);
  return full_path_batch(data, std::move(paths));
}

double time_to_maturity(const TimeGrid& grid, int j) { return j == grid.steps ? 0.0 : grid.t_end - grid.node(j); }

Eigen::MatrixXd batch_inputs(const PricedModel& model, const HedgingDataset& data, const LossBatch& batch) {
  const TimeGrid& grid = data.paths.grid;
  Eigen::MatrixXd inputs(model.network().shape.inputs, static_cast<Eigen::Index>(batch.nodes.size()));
  std::size_t k = 0;
  while (k < batch.nodes.size()) {
    const Eigen::Index path = batch.nodes[k].path;
    std::size_t end = k + 1;
    while (end < batch.nodes.size() && batch.nodes[end].path == path) ++end;
    const auto len = static_cast<Eigen::Index>(end - k);
    Eigen::ArrayXd tau(len), x(len), c(len);
    for (Eigen::Index q = 0; q < len; ++q) {
      const int j = batch.nodes[k + static_cast<std::size_t>(q)].step;
      tau[q] = time_to_maturity(grid, j);
      x[q] = data.paths.x(j, path);
      c[q] = data.paths.c(j, path);
    }
    inputs.middleCols(static_cast<Eigen::Index>(k), len) = model.network_inputs(tau, x, c, data.terms[path]);
    k = end;
  }
  return inputs;
}

// Blend weights per grid node and baseline values per (node, path), fixed for a run.
struct NodeCache {
  Eigen::VectorXd w_baseline;
  Eigen::VectorXd w_network;
  Eigen::MatrixXd f;
  Eigen::MatrixXd f_x;
  Eigen::MatrixXd f_c;
};

NodeCache build_cache(const PricedModel& model, const HedgingDataset& data) {
  const TimeGrid& grid = data.paths.grid;
  const int m = grid.steps;
  NodeCache cache;
  cache.w_baseline.resize(m + 1);
  cache.w_network.resize(m + 1);
  for (int j = 0; j <= m; ++j) {
    const double tau = time_to_maturity(grid, j);
    const BlendWeights w = blend_weights(model.architecture(), grid.t_end - tau, grid.t_end);
    cache.w_baseline[j] = w.baseline;
    cache.w_network[j] = w.network;
  }
  if (cache.w_baseline.isZero(0.0)) return cache;
  cache.f = Eigen::MatrixXd::Zero(m + 1, data.size());
  cache.f_x = Eigen::MatrixXd::Zero(m + 1, data.size());
  cache.f_c = Eigen::MatrixXd::Zero(m + 1, data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int j = data.start(i); j <= m; ++j) {
      if (cache.w_baseline[j] == 0.0) continue;
      const BaselineValue b =
          model.baseline()(time_to_maturity(grid, j), data.paths.x(j, i), data.paths.c(j, i), data.terms[i]);
      cache.f(j, i) = b.value;
      cache.f_x(j, i) = b.d_x;
      cache.f_c(j, i) = b.d_c;
    }
  }
  return cache;
}

}  // namespace

void ContractRange::validate(const char* name) const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
    throw std::invalid_argument(std::string(name) + " range must satisfy lo <= hi");
  }
}

ContractRange TrainConfig::strike_range() const { return strike.value_or(ContractRange::fixed(payoff.strike)); }

ContractRange TrainConfig::cash_range() const {
  return cash.value_or(ContractRange::fixed(payoff.cash.value_or(0.0)));
}

double TrainConfig::call_maturity() const {
  if (call_maturity_override) return *call_maturity_override;
  return grid.t_end + (payoff.is_equinox() ? payoff.second_period.value_or(0.0) : 0.0);
}

double TrainConfig::learning_rate_at(long epoch) const {
  const long decays = lr_decay_every > 0 ? (epoch - 1) / lr_decay_every : 0;
  return learning_rate * std::pow(lr_decay, static_cast<double>(decays));
}

void TrainConfig::validate() const {
  payoff.validate();
  loss.validate();
  grid.validate();
  shape().validate();
  if (epochs < 1) throw std::invalid_argument("training: epochs must be >= 1");
  if (n_train < 1) throw std::invalid_argument("training: n_train must be >= 1");
  if (batch_paths < 1 || batch_paths > n_train) throw std::invalid_argument("training: batch_paths must lie in [1, n_train]");
  if (batch_pairs < 1 || batch_pairs > n_train * grid.steps) {
    throw std::invalid_argument("training: batch_pairs must lie in [1, n_train * steps]");
  }
  if (!(std::isfinite(learning_rate) && learning_rate >= 0.0)) throw std::invalid_argument("training: learning rate must be >= 0");
  if (!(std::isfinite(lr_decay) && lr_decay > 0.0)) throw std::invalid_argument("training: lr_decay must be > 0");
  call_strike.validate("call_strike");
  if (call_strike.lo <= 0.0) throw std::invalid_argument("training: call strikes must be > 0");
  strike_range().validate("strike");
  if (strike_range().lo <= 0.0) throw std::invalid_argument("training: strikes must be > 0");
  cash_range().validate("cash");
  if (cash_range().lo < 0.0) throw std::invalid_argument("training: cash amounts must be >= 0");
  if (call_maturity() < grid.t_end) throw std::invalid_argument("training: tradable call expires inside the grid");
}

HedgingDataset make_dataset(const TrainConfig& cfg, const ModelParams& market, const PricedModel* call_model) {
  cfg.validate();
  market.validate();
  if (cfg.payoff.is_equinox() && call_model == nullptr) {
    throw std::invalid_argument("make_dataset: Equinox payoffs need a trained call model");
  }
  const Eigen::Index n = cfg.n_train;
  const int m = cfg.grid.steps;

  Xoshiro256pp contract_rng(derived_seed(cfg.seed_data, SeedPurpose::ContractSampling));
  Eigen::VectorXd call_strikes(n);
  HedgingDataset data;
  data.kind = cfg.payoff.kind;
  data.terms.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    call_strikes[i] = draw(cfg.call_strike, contract_rng);
    ContractTerms terms = terms_for(cfg.payoff, call_strikes[i]);
    terms.strike = draw(cfg.strike_range(), contract_rng);
    if (cfg.payoff.kind == PayoffKind::EquinoxFull) terms.cash = draw(cfg.cash_range(), contract_rng);
    data.terms[static_cast<std::size_t>(i)] = terms;
  }

  Eigen::VectorXi starts = Eigen::VectorXi::Zero(n);
  if (cfg.random_start) {
    Xoshiro256pp start_rng(derived_seed(cfg.seed_data, SeedPurpose::StartDates));
    std::uniform_int_distribution<int> pick(0, m - 1);
    for (Eigen::Index i = 0; i < n; ++i) starts[i] = pick(start_rng);
  }
  PathSet paths = simulate_paths_from(market, cfg.grid, starts, MarketState::defaults_for(market),
                                      derived_seed(cfg.seed_data, SeedPurpose::TrainingPaths));
  data.paths = overlay_tradable_call(std::move(paths), call_strikes, cfg.call_maturity());

  data.target.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.target[i] = terminal_target(data.kind, data.terms[static_cast<std::size_t>(i)], data.paths.x(m, i),
                                     data.paths.c(m, i), market.r, call_model);
  }
  return data;
}

TrainResult train(const TrainConfig& cfg, const HedgingDataset& data, const ModelParams& market,
                  std::shared_ptr<const PricedModel> call_model, const Resume* resume,
                  const std::function<void(const LogRow&)>& on_epoch) {
  cfg.validate();
  data.validate();
  if (data.kind != cfg.payoff.kind) throw std::invalid_argument("train: dataset payoff differs from the config");
  const NetworkShape shape = cfg.shape();
  NetworkParams net = resume != nullptr ? resume->net : init_params(shape, cfg.seed_init);
  if (!(net.shape == shape)) throw std::invalid_argument("train: resumed network shape differs from the config");

  TrainResult result;
  result.model = std::make_shared<PricedModel>(
      make_priced_model(cfg.variant, cfg.payoff, market, std::move(net), data.horizon(), std::move(call_model)));
  check_horizon(result.model->horizon(), data);
  PricedModel& model = *result.model;

  if (resume != nullptr) {
    result.progress = resume->progress;
    if (result.progress.adam.first_moment.size() != shape.param_count()) {
      throw std::invalid_argument("train: resumed optimizer state does not match the network");
    }
  } else {
    result.progress.adam = AdamState(shape.param_count(), AdamConfig{cfg.learning_rate});
  }

  const NodeCache cache = build_cache(model, data);
  const bool with_baseline = cache.f.size() > 0;
  const std::uint64_t minibatch_seed = derived_seed(cfg.seed_data, SeedPurpose::Minibatch);
  result.log.reserve(static_cast<std::size_t>(std::max(0L, cfg.epochs - result.progress.epoch)));

  for (long epoch = result.progress.epoch + 1; epoch <= cfg.epochs; ++epoch) {
    auto rng = substream(minibatch_seed, static_cast<std::uint64_t>(epoch));
    const LossBatch batch = sample_batch(cfg, data, rng);
    const Eigen::MatrixXd inputs = batch_inputs(model, data, batch);

    LossComponents parts;
    ParamGradResult grad;
    try {
      grad = param_grad(model.network(), inputs, [&](const ProbeSet& probes) {
        auto quote_at = [&](Eigen::Index k) {
          const NodeRef& node = batch.nodes[static_cast<std::size_t>(k)];
          const double wn = cache.w_network[node.step];
          NodeQuote<Var> q{probes.value(k) * wn, probes.grad(k, kSpotInput) * wn, probes.grad(k, kCallInput) * wn};
          const double wb = cache.w_baseline[node.step];
          if (with_baseline && wb != 0.0) {
            q.price += wb * cache.f(node.step, node.path);
            q.delta_x += wb * cache.f_x(node.step, node.path);
            q.delta_c += wb * cache.f_c(node.step, node.path);
          }
          return q;
        };
        const LossTerms<Var> terms = batch_losses<Var>(data, batch, quote_at);
        parts = {terms.sf.value(), terms.pl.value(), terms.terminal.value()};
        return composite_loss(cfg.loss, terms);
      });
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")", e.batch_index(), epoch);
    }
    if (!std::isfinite(grad.objective) || !grad.gradient.allFinite()) {
      throw NumericError("non-finite loss or gradient (epoch " + std::to_string(epoch) + ")", {}, epoch);
    }

    const LogRow row{epoch, grad.objective, parts.sf, parts.pl, parts.terminal};
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);
    adam_step(result.progress.adam, model.network(), grad.gradient, cfg.learning_rate_at(epoch));
    result.progress.epoch = epoch;
  }
  return result;
}

LossComponents dataset_losses(const PricedModel& model, const HedgingDataset& data) {
  return evaluate_losses(model, data, all_paths_batch(data));
}

TrainConfig equinox_call_config(const TrainConfig& first_period) {
  const PayoffSpec& eq = first_period.payoff;
  if (!eq.is_equinox()) throw std::invalid_argument("equinox_call_config: Equinox payoff expected");
  TrainConfig cfg = first_period;
  const double horizon = first_period.grid.t_end + *eq.second_period;
  cfg.payoff = PayoffSpec::call(eq.strike);
  cfg.grid = TimeGrid{horizon, std::max(1, static_cast<int>(std::lround(first_period.grid.steps * horizon /
                                                                         first_period.grid.t_end)))};
  cfg.cash.reset();
  cfg.call_maturity_override.reset();
  return cfg;
}

TrainConfig equinox_digital_config(const TrainConfig& first_period) {
  const PayoffSpec& eq = first_period.payoff;
  if (!eq.is_equinox()) throw std::invalid_argument("equinox_digital_config: Equinox payoff expected");
  TrainConfig cfg = first_period;
  cfg.payoff = PayoffSpec::digital(*eq.barrier);
  cfg.strike = ContractRange::fixed(*eq.barrier);
  cfg.cash.reset();
  cfg.call_maturity_override = first_period.call_maturity();
  return cfg;
}

EquinoxNets train_equinox_two_nets(const TrainConfig& first_period, const ModelParams& market,
                                   std::shared_ptr<const PricedModel> call_model) {
  const PayoffSpec& eq = first_period.payoff;
  if (!eq.is_equinox()) throw std::invalid_argument("train_equinox_two_nets: Equinox payoff expected");
  EquinoxNets nets;
  if (call_model) {
    nets.call = std::make_shared<PricedModel>(*call_model);
  } else {
    const TrainConfig call_cfg = equinox_call_config(first_period);
    TrainResult res = train(call_cfg, make_dataset(call_cfg, market), market);
    nets.call = res.model;
    nets.call_log = std::move(res.log);
  }

  TrainConfig barrier_cfg = first_period;
  barrier_cfg.payoff = PayoffSpec::equinox_barrier_call(eq.strike, *eq.barrier, *eq.second_period);
  barrier_cfg.cash.reset();
  TrainResult barrier = train(barrier_cfg, make_dataset(barrier_cfg, market, nets.call.get()), market, nets.call);
  nets.barrier_call = barrier.model;
  nets.barrier_call_log = std::move(barrier.log);

  const TrainConfig digital_cfg = equinox_digital_config(first_period);
  TrainResult digital = train(digital_cfg, make_dataset(digital_cfg, market), market);
  nets.digital = digital.model;
  nets.digital_log = std::move(digital.log);
  return nets;
}

TrainResult train_equinox_single(TrainConfig first_period, const ModelParams& market,
                                 std::shared_ptr<const PricedModel> call_model) {
  if (first_period.payoff.kind != PayoffKind::EquinoxFull) {
    throw std::invalid_argument("train_equinox_single: equinox_full payoff expected");
  }
  if (!call_model) throw std::invalid_argument("train_equinox_single: trained call model required");
  if (!first_period.cash) first_period.cash = ContractRange{0.0, 0.15};
  const HedgingDataset data = make_dataset(first_period, market, call_model.get());
  return train(first_period, data, market, std::move(call_model));
}

}  // namespace dh
