#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "deephedge/market_sim.hpp"
#include "deephedge/payoffs.hpp"
#include "deephedge/pricer.hpp"

namespace dh {

/// Summary statistics in percent of the normalization. Population SD,
/// nearest-rank quantiles (order statistic ceil(q n)).
struct PnLStats {
  double mean = 0.0;
  double sd = 0.0;
  double q01 = 0.0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
};

struct PnLReport {
  Eigen::VectorXd samples;  // discounted P&L per path, in price units
  double normalization = 1.0;
  PnLStats stats;
  std::string label;
};

PnLReport pnl_stats(Eigen::VectorXd samples, double normalization, std::string label = {});

/// price_0 + sum_j (dx_j (X_{j+1} - X_j) + dc_j (C_{j+1} - C_j)) e^{-r t_{j+1}} - g e^{-r T}
/// from quotes at nodes 0..m-1 of a path with nodes 0..m.
double pnl_from_quotes(const PathQuotes& quotes, const Eigen::Ref<const Eigen::ArrayXd>& x,
                       const Eigen::Ref<const Eigen::ArrayXd>& c, const TimeGrid& grid, double r,
                       double payoff_value);

/// Times to maturity of nodes 0..m-1 for a contract maturing at the grid horizon.
Eigen::ArrayXd hedge_taus(const TimeGrid& grid);

/// P&L of path i hedged with the model's deltas at every node before maturity.
template <PathQuoter Q>
double pnl_per_path(const Q& model, const PathSet& paths, Eigen::Index i, const ContractTerms& terms,
                    double payoff_value) {
  const int m = paths.grid.steps;
  const Eigen::ArrayXd x = paths.x.col(i).array();
  const Eigen::ArrayXd c = paths.c.col(i).array();
  const PathQuotes q = model.quote_path(hedge_taus(paths.grid), x.head(m), c.head(m), terms);
  return pnl_from_quotes(q, x, c, paths.grid, paths.params.r, payoff_value);
}

/// sigma_circ Black-Scholes value and delta of a vanilla payoff; the call leg is not traded.
Quote bs_benchmark_quote(PayoffKind kind, double tau, double x, double strike, double sigma_circ, double r);

double bs_benchmark_pnl(const PathSet& paths, Eigen::Index i, PayoffKind kind, const ContractTerms& terms,
                        double sigma_circ, double payoff_value);

/// Fresh out-of-sample setup. Paths are simulated in blocks; path i always
/// comes from substream (seed, i).
struct EvalSetup {
  ModelParams market;
  TimeGrid grid = TimeGrid::with_default_density(2.0);
  PayoffSpec payoff = PayoffSpec::call(1.0);
  double call_strike = 1.2;
  Eigen::Index n_paths = 100000;
  std::uint64_t seed = 5;
  Eigen::Index block = 1024;

  ContractTerms terms() const { return terms_for(payoff, call_strike); }
  void validate() const;
};

/// Calls fn(block_paths) for consecutive blocks covering n_paths, with the
/// tradable call overlaid at the given maturity (default: grid horizon).
void for_each_path_block(const EvalSetup& setup, const std::function<void(const PathSet&)>& fn,
                         std::optional<double> call_maturity = {});

/// sigma_circ Black-Scholes price of the payoff at t = 0 from the initial spot.
double bs_normalization(const EvalSetup& setup);

PnLReport evaluate_benchmark(const EvalSetup& setup);

struct Evaluation {
  PnLReport network;
  PnLReport benchmark;
};

/// Network and benchmark P&L on the same paths. Vanilla payoffs only.
Evaluation evaluate(const PricedModel& model, const EvalSetup& setup);

struct RobustnessCell {
  double train_lambda = 0.0;
  double test_lambda = 0.0;
  PnLStats stats;
};

/// Every trained model (one per training intensity) evaluated under every test
/// intensity; rows ordered train-major. Each test intensity uses the same seed.
std::vector<RobustnessCell> robustness_grid(
    const std::vector<std::pair<double, std::shared_ptr<const PricedModel>>>& models,
    const std::vector<double>& test_lambdas, const EvalSetup& setup);

void write_pnl_samples_csv(const PnLReport& report, std::ostream& out);
/// `# normalization=<value>` line, then `metric,value_pct` rows.
void write_pnl_stats_csv(const PnLReport& report, std::ostream& out);
/// 101 equal bins over mean +- 3 SD of the samples: `bin_left,bin_right,count`.
void write_histogram_csv(const PnLReport& report, std::ostream& out);
void write_robustness_csv(const std::vector<RobustnessCell>& cells, std::ostream& out);

}  // namespace dh
