#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "deephedge/adam.hpp"
#include "deephedge/dataset.hpp"
#include "deephedge/losses.hpp"
#include "deephedge/pricer.hpp"

namespace dh {

/// Contract parameter drawn uniformly in [lo, hi]; lo == hi fixes it.
struct ContractRange {
  double lo = 1.0;
  double hi = 1.0;

  static ContractRange fixed(double v) { return {v, v}; }
  bool is_fixed() const { return lo == hi; }
  void validate(const char* name) const;
};

struct TrainConfig {
  PayoffSpec payoff = PayoffSpec::call(1.0);
  Architecture variant = Architecture::Constrained;
  LossConfig loss;
  int hidden_layers = 3;
  int width = 32;
  TimeGrid grid = TimeGrid::with_default_density(2.0);
  Eigen::Index n_train = Eigen::Index{1} << 17;
  long epochs = 20000;
  int batch_paths = 256;
  int batch_pairs = 4096;
  double learning_rate = 1e-3;
  double lr_decay = 0.5;
  long lr_decay_every = 20000;
  ContractRange call_strike = ContractRange::fixed(1.2);
  // Unset ranges are fixed at the payoff's own strike and cash.
  std::optional<ContractRange> strike;
  std::optional<ContractRange> cash;
  std::optional<double> call_maturity_override;
  bool random_start = false;
  std::uint64_t seed_data = 1;
  std::uint64_t seed_init = 2;

  ContractRange strike_range() const;
  ContractRange cash_range() const;
  /// Maturity of the tradable call: the grid horizon, plus R for Equinox payoffs.
  double call_maturity() const;
  NetworkShape shape() const { return default_shape(payoff.kind, hidden_layers, width); }
  double learning_rate_at(long epoch) const;
  void validate() const;
};

/// Training paths with per-path contract terms. Equinox payoffs need the
/// trained call model for their terminal targets.
HedgingDataset make_dataset(const TrainConfig& cfg, const ModelParams& market,
                            const PricedModel* call_model = nullptr);

struct LogRow {
  long epoch = 0;
  double loss = 0.0;
  double sf = 0.0;
  double pl = 0.0;
  double terminal = 0.0;
};

struct TrainingProgress {
  AdamState adam;
  long epoch = 0;  // epochs completed
};

struct TrainResult {
  std::shared_ptr<PricedModel> model;
  TrainingProgress progress;
  std::vector<LogRow> log;
};

/// Optional starting point: network and optimizer state of an earlier run.
struct Resume {
  NetworkParams net;
  TrainingProgress progress;
};

/// Runs epochs progress.epoch + 1 .. cfg.epochs of: sample a minibatch,
/// evaluate the composite loss, differentiate, take an Adam step.
/// Throws NumericError carrying the epoch (and batch index when known) if a
/// non-finite value appears.
TrainResult train(const TrainConfig& cfg, const HedgingDataset& data, const ModelParams& market,
                  std::shared_ptr<const PricedModel> call_model = nullptr, const Resume* resume = nullptr,
                  const std::function<void(const LogRow&)>& on_epoch = {});

/// Every step to the terminal node of each path; used by the loss hooks and tests.
LossComponents dataset_losses(const PricedModel& model, const HedgingDataset& data);

struct EquinoxNets {
  std::shared_ptr<PricedModel> call;
  std::shared_ptr<PricedModel> barrier_call;
  std::shared_ptr<PricedModel> digital;
  std::vector<LogRow> call_log;
  std::vector<LogRow> barrier_call_log;
  std::vector<LogRow> digital_log;
};

/// Call network over [0, T + R] for the second period.
TrainConfig equinox_call_config(const TrainConfig& first_period);
/// Digital network paying 1{X_T > B} over [0, T].
TrainConfig equinox_digital_config(const TrainConfig& first_period);

/// Call network first (unless supplied), then the barrier-call network on the
/// targets 1{X_T <= B} CallModel(R, .) and the digital network on 1{X_T > B}.
EquinoxNets train_equinox_two_nets(const TrainConfig& first_period, const ModelParams& market,
                                   std::shared_ptr<const PricedModel> call_model = nullptr);

/// One network over (tau, x, c, K, R, B, P, G) with G drawn from the cash range
/// (default [0, 0.15]).
TrainResult train_equinox_single(TrainConfig first_period, const ModelParams& market,
                                 std::shared_ptr<const PricedModel> call_model);

}  // namespace dh
