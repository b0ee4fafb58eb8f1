#include "deephedge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "deephedge/analytics.hpp"

namespace dh {

namespace {

double nearest_rank(const std::vector<double>& sorted, long percent) {
  const long n = static_cast<long>(sorted.size());
  const long rank = std::max(1L, (percent * n + 99) / 100);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

PnLReport pnl_stats(Eigen::VectorXd samples, double normalization, std::string label) {
  if (samples.size() == 0) throw std::invalid_argument("pnl_stats: no samples");
  if (!(std::isfinite(normalization) && normalization > 0.0)) {
    throw std::invalid_argument("pnl_stats: normalization must be > 0");
  }
  const auto n = static_cast<double>(samples.size());
  const double scale = 100.0 / normalization;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) sum += samples[i];
  const double mean = sum / n;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) ss += (samples[i] - mean) * (samples[i] - mean);
  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());

  PnLReport report;
  report.normalization = normalization;
  report.label = std::move(label);
  report.stats = {mean * scale,
                  std::sqrt(ss / n) * scale,
                  nearest_rank(sorted, 1) * scale,
                  nearest_rank(sorted, 10) * scale,
                  nearest_rank(sorted, 50) * scale,
                  nearest_rank(sorted, 90) * scale,
                  nearest_rank(sorted, 99) * scale};
  report.samples = std::move(samples);
  return report;
}

Eigen::ArrayXd hedge_taus(const TimeGrid& grid) {
  Eigen::ArrayXd tau(grid.steps);
  for (int j = 0; j < grid.steps; ++j) tau[j] = grid.t_end - grid.node(j);
  return tau;
}

double pnl_from_quotes(const PathQuotes& quotes, const Eigen::Ref<const Eigen::ArrayXd>& x,
                       const Eigen::Ref<const Eigen::ArrayXd>& c, const TimeGrid& grid, double r,
                       double payoff_value) {
  const int m = grid.steps;
  if (quotes.price.size() < m || x.size() != m + 1 || c.size() != m + 1) {
    throw std::invalid_argument("pnl: path and quotes do not cover the grid");
  }
  double pnl = quotes.price[0];
  for (int j = 0; j < m; ++j) {
    const double gain = quotes.delta_x[j] * (x[j + 1] - x[j]) + quotes.delta_c[j] * (c[j + 1] - c[j]);
    pnl += gain * std::exp(-r * grid.node(j + 1));
  }
  return pnl - payoff_value * std::exp(-r * grid.t_end);
}

Quote bs_benchmark_quote(PayoffKind kind, double tau, double x, double strike, double sigma_circ, double r) {
  const BsInputs in{tau, x, sigma_circ, r, strike};
  switch (kind) {
    case PayoffKind::Call: return {bs_call_price(in), bs_call_delta(in), 0.0};
    case PayoffKind::Square: return {bs_square_price(in), bs_square_delta(in), 0.0};
    case PayoffKind::Digital: return {bs_digital_price(in), bs_digital_delta(in), 0.0};
    default: break;
  }
  throw std::invalid_argument("Black-Scholes benchmark is defined for vanilla payoffs only");
}

double bs_benchmark_pnl(const PathSet& paths, Eigen::Index i, PayoffKind kind, const ContractTerms& terms,
                        double sigma_circ, double payoff_value) {
  const TimeGrid& grid = paths.grid;
  const int m = grid.steps;
  const double r = paths.params.r;
  PathQuotes q{Eigen::ArrayXd(m), Eigen::ArrayXd(m), Eigen::ArrayXd::Zero(m)};
  for (int j = 0; j < m; ++j) {
    const Quote b = bs_benchmark_quote(kind, grid.t_end - grid.node(j), paths.x(j, i), terms.strike, sigma_circ, r);
    q.price[j] = b.price;
    q.delta_x[j] = b.delta_x;
  }
  return pnl_from_quotes(q, paths.x.col(i).array(), paths.c.col(i).array(), grid, r, payoff_value);
}

void EvalSetup::validate() const {
  market.validate();
  grid.validate();
  payoff.validate();
  if (n_paths < 1) throw std::invalid_argument("evaluation: n_paths must be >= 1");
  if (block < 1) throw std::invalid_argument("evaluation: block must be >= 1");
  if (!(call_strike > 0.0)) throw std::invalid_argument("evaluation: call strike must be > 0");
}

void for_each_path_block(const EvalSetup& setup, const std::function<void(const PathSet&)>& fn,
                         std::optional<double> call_maturity) {
  setup.validate();
  const MarketState init = MarketState::defaults_for(setup.market);
  for (Eigen::Index first = 0; first < setup.n_paths; first += setup.block) {
    const Eigen::Index count = std::min(setup.block, setup.n_paths - first);
    PathSet paths = simulate_paths(setup.market, setup.grid, count, init, setup.seed, first);
    fn(overlay_tradable_call(std::move(paths), setup.call_strike, call_maturity));
  }
}

double bs_normalization(const EvalSetup& setup) {
  const MarketState init = MarketState::defaults_for(setup.market);
  return bs_benchmark_quote(setup.payoff.kind, setup.grid.t_end, init.x, setup.payoff.strike,
                            setup.market.sigma_circ, setup.market.r)
      .price;
}

namespace {

// Quotes every hedging node of a block of paths in one network batch.
void network_block_pnl(const PricedModel& model, const PathSet& paths, const ContractTerms& terms,
                       PayoffKind kind, Eigen::VectorXd& out, Eigen::Index first) {
  const int m = paths.grid.steps;
  const Eigen::Index n = paths.size();
  const Eigen::ArrayXd taus = hedge_taus(paths.grid);
  Eigen::ArrayXd tau(m * n), x(m * n), c(m * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    tau.segment(i * m, m) = taus;
    x.segment(i * m, m) = paths.x.col(i).head(m).array();
    c.segment(i * m, m) = paths.c.col(i).head(m).array();
  }
  const PathQuotes all = model.quote_path(tau, x, c, terms);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PathQuotes q{all.price.segment(i * m, m), all.delta_x.segment(i * m, m), all.delta_c.segment(i * m, m)};
    const double g = eval_payoff(kind, terms, paths.x(m, i));
    out[first + i] = pnl_from_quotes(q, paths.x.col(i).array(), paths.c.col(i).array(), paths.grid,
                                     paths.params.r, g);
  }
}

void check_model(const PricedModel& model, const EvalSetup& setup) {
  if (model.payoff().kind != setup.payoff.kind) {
    throw std::invalid_argument("evaluation: model payoff '" + std::string(to_string(model.payoff().kind)) +
                                "' differs from the configured payoff");
  }
  if (model.payoff().is_equinox()) throw std::invalid_argument("evaluation: use the Equinox pipeline");
  if (std::abs(model.horizon() - setup.grid.t_end) > 1e-12) {
    throw std::invalid_argument("evaluation: model horizon differs from the evaluation grid");
  }
}

}  // namespace

PnLReport evaluate_benchmark(const EvalSetup& setup) {
  const ContractTerms terms = setup.terms();
  Eigen::VectorXd samples(setup.n_paths);
  Eigen::Index first = 0;
  for_each_path_block(setup, [&](const PathSet& paths) {
    const int m = paths.grid.steps;
    for (Eigen::Index i = 0; i < paths.size(); ++i) {
      const double g = eval_payoff(setup.payoff.kind, terms, paths.x(m, i));
      samples[first + i] = bs_benchmark_pnl(paths, i, setup.payoff.kind, terms, setup.market.sigma_circ, g);
    }
    first += paths.size();
  });
  return pnl_stats(std::move(samples), bs_normalization(setup), "benchmark");
}

Evaluation evaluate(const PricedModel& model, const EvalSetup& setup) {
  check_model(model, setup);
  const ContractTerms terms = setup.terms();
  Eigen::VectorXd network(setup.n_paths), benchmark(setup.n_paths);
  Eigen::Index first = 0;
  for_each_path_block(setup, [&](const PathSet& paths) {
    network_block_pnl(model, paths, terms, setup.payoff.kind, network, first);
    const int m = paths.grid.steps;
    for (Eigen::Index i = 0; i < paths.size(); ++i) {
      const double g = eval_payoff(setup.payoff.kind, terms, paths.x(m, i));
      benchmark[first + i] = bs_benchmark_pnl(paths, i, setup.payoff.kind, terms, setup.market.sigma_circ, g);
    }
    first += paths.size();
  });
  const double norm = bs_normalization(setup);
  return {pnl_stats(std::move(network), norm, "network"), pnl_stats(std::move(benchmark), norm, "benchmark")};
}

std::vector<RobustnessCell> robustness_grid(
    const std::vector<std::pair<double, std::shared_ptr<const PricedModel>>>& models,
    const std::vector<double>& test_lambdas, const EvalSetup& setup) {
  std::vector<RobustnessCell> cells;
  for (const auto& [train_lambda, model] : models) {
    if (!model) throw std::invalid_argument("robustness: missing model for lambda " + std::to_string(train_lambda));
    for (double test_lambda : test_lambdas) {
      EvalSetup s = setup;
      s.market.jump_lambda = test_lambda;
      const Evaluation e = evaluate(*model, s);
      cells.push_back({train_lambda, test_lambda, e.network.stats});
    }
  }
  return cells;
}

void write_pnl_samples_csv(const PnLReport& report, std::ostream& out) {
  out << "pnl\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < report.samples.size(); ++i) out << report.samples[i] << '\n';
}

void write_pnl_stats_csv(const PnLReport& report, std::ostream& out) {
  const PnLStats& s = report.stats;
  out << std::setprecision(17) << "# normalization=" << report.normalization << '\n';
  out << "metric,value_pct\n";
  out << "mean," << s.mean << "\nsd," << s.sd << "\nq01," << s.q01 << "\nq10," << s.q10 << "\nq50," << s.q50
      << "\nq90," << s.q90 << "\nq99," << s.q99 << '\n';
}

void write_histogram_csv(const PnLReport& report, std::ostream& out) {
  constexpr int kBins = 101;
  const Eigen::VectorXd& v = report.samples;
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().mean());
  const double left = mean - 3.0 * sd;
  const double width = 6.0 * sd / kBins;
  std::vector<long> counts(kBins, 0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (width == 0.0) {
      ++counts[kBins / 2];
      continue;
    }
    const double pos = (v[i] - left) / width;
    if (pos < 0.0 || pos > kBins) continue;
    ++counts[std::min(kBins - 1, static_cast<int>(pos))];
  }
  out << "bin_left,bin_right,count\n" << std::setprecision(17);
  for (int b = 0; b < kBins; ++b) {
    out << left + b * width << ',' << (b + 1 == kBins ? mean + 3.0 * sd : left + (b + 1) * width) << ','
        << counts[b] << '\n';
  }
}

void write_robustness_csv(const std::vector<RobustnessCell>& cells, std::ostream& out) {
  out << "train_lambda,test_lambda,mean,sd,q01,q10,q90,q99\n" << std::setprecision(17);
  for (const auto& c : cells) {
    out << c.train_lambda << ',' << c.test_lambda << ',' << c.stats.mean << ',' << c.stats.sd << ','
        << c.stats.q01 << ',' << c.stats.q10 << ',' << c.stats.q90 << ',' << c.stats.q99 << '\n';
  }
}

}  // namespace dh
