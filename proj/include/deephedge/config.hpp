#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "deephedge/equinox.hpp"
#include "deephedge/evaluation.hpp"
#include "deephedge/market_sim.hpp"
#include "deephedge/training.hpp"

namespace dh {

/// Everything a run needs. Sections of the YAML file:
///   model, grid, payoff, architecture, loss, training, evaluation,
///   simulate, robustness, equinox, seeds.
/// payoff.kind and architecture.variant are required; every other key has a
/// default and unknown keys are rejected.
struct RunConfig {
  ModelParams model;
  TrainConfig training;  // payoff, variant, loss, grid, shape, seeds live here

  Eigen::Index eval_paths = 100000;
  double eval_call_strike = 1.2;
  Eigen::Index eval_block = 1024;
  bool histogram = true;

  Eigen::Index simulate_paths = 1000;

  std::vector<double> train_lambdas{0.0, 0.5, 2.0};
  std::vector<double> test_lambdas{0.0, 0.5, 2.0};

  EquinoxMode equinox_mode = EquinoxMode::TwoNets;
  EquinoxDiscount equinox_discount = EquinoxDiscount::SecondPeriod;
  std::vector<double> equinox_g_values{0.0, 0.05, 0.1, 0.15};
  ContractRange equinox_g_range{0.0, 0.15};

  /// Evaluation setup on paths disjoint from training (seed derived from the data seed).
  EvalSetup eval_setup() const;
  void validate() const;
};

/// Parses YAML text. Errors are ConfigError messages of the form
/// "<source>:<line>:<column>: <reason>".
RunConfig parse_run_config(std::string_view text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& file);

/// Fully defaulted configuration as YAML; parsing it yields the same RunConfig.
std::string effective_config_yaml(const RunConfig& cfg);

}  // namespace dh
