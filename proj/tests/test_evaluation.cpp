#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deephedge/analytics.hpp"
#include "deephedge/evaluation.hpp"

using namespace dh;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// price = x with hedge (1, 0): a unit of the underlying held throughout.
struct HoldUnderlying {
  double T;
  double horizon() const { return T; }
  PathQuotes quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd&,
                        const ContractTerms&) const {
    return {x, Eigen::ArrayXd::Ones(tau.size()), Eigen::ArrayXd::Zero(tau.size())};
  }
};

EvalSetup small_setup() {
  EvalSetup s;
  s.grid = TimeGrid{0.5, 10};
  s.n_paths = 300;
  s.block = 128;
  s.seed = 21;
  return s;
}

std::shared_ptr<const PricedModel> small_model(std::uint64_t seed, double horizon = 0.5) {
  NetworkParams net = init_params(default_shape(PayoffKind::Call, 2, 6), seed);
  return std::make_shared<PricedModel>(
      make_priced_model(Architecture::Constrained, PayoffSpec::call(1.0), ModelParams{}, net, horizon));
}

}  // namespace

TEST_CASE("summary statistics") {
  Eigen::VectorXd three(3);
  three << -1.0, 0.0, 1.0;
  const PnLReport r = pnl_stats(three, 1.0);
  CHECK(r.stats.mean == 0.0);
  CHECK(r.stats.sd == doctest::Approx(100.0 * std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(r.stats.sd == doctest::Approx(81.65).epsilon(1e-4));

  const PnLReport flat = pnl_stats(Eigen::VectorXd::Constant(7, 0.3), 2.0);
  CHECK(flat.stats.sd == 0.0);
  CHECK(flat.stats.mean == doctest::Approx(15.0));

  Eigen::VectorXd ranks(100);
  for (int k = 0; k < 100; ++k) ranks[k] = 100 - k;
  const PnLReport q = pnl_stats(ranks, 100.0);
  CHECK(q.stats.q01 == 1.0);
  CHECK(q.stats.q10 == 10.0);
  CHECK(q.stats.q50 == 50.0);
  CHECK(q.stats.q90 == 90.0);
  CHECK(q.stats.q99 == 99.0);

  std::mt19937_64 rng(4);
  std::student_t_distribution<double> t(3.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd v(1 + rep * 37);
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = t(rng);
    const PnLStats s = pnl_stats(v, 1.0).stats;
    CHECK(s.q01 <= s.q10);
    CHECK(s.q10 <= s.q50);
    CHECK(s.q50 <= s.q90);
    CHECK(s.q90 <= s.q99);
  }
  CHECK_THROWS_AS(pnl_stats(Eigen::VectorXd(0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pnl_stats(three, 0.0), std::invalid_argument);
}

TEST_CASE("P&L from quotes by hand") {
  PathQuotes q{Eigen::ArrayXd::Constant(1, 0.5), Eigen::ArrayXd::Constant(1, 0.2), Eigen::ArrayXd::Zero(1)};
  Eigen::ArrayXd x(2), c(2);
  x << 1.0, 1.2;
  c << 0.0, 0.0;
  CHECK(pnl_from_quotes(q, x, c, TimeGrid{1.0, 1}, 0.0, 0.6) == doctest::Approx(-0.06).epsilon(1e-14));
  const double r = 0.05;
  CHECK(pnl_from_quotes(q, x, c, TimeGrid{1.0, 1}, r, 0.6) ==
        doctest::Approx(0.5 + 0.2 * 0.2 * std::exp(-r) - 0.6 * std::exp(-r)).epsilon(1e-14));
  q.delta_x.setZero();
  CHECK(pnl_from_quotes(q, x, c, TimeGrid{1.0, 1}, 0.0, 0.6) == doctest::Approx(-0.1).epsilon(1e-14));
  q.delta_c.setConstant(2.0);
  c << 0.1, 0.15;
  CHECK(pnl_from_quotes(q, x, c, TimeGrid{1.0, 1}, 0.0, 0.6) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("holding the underlying replicates it exactly") {
  ModelParams mp;
  const TimeGrid grid{1.0, 50};
  const PathSet paths = overlay_tradable_call(simulate_paths(mp, grid, 1000, MarketState::defaults_for(mp), 3), 1.2);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < paths.size(); ++i) {
    worst = std::max(worst, std::abs(pnl_per_path(HoldUnderlying{1.0}, paths, i, ContractTerms{}, paths.x(50, i))));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("benchmark quotes") {
  const Quote call = bs_benchmark_quote(PayoffKind::Call, 0.7, 1.05, 1.0, 0.2, 0.01);
  CHECK(call.price == bs_call_price({0.7, 1.05, 0.2, 0.01, 1.0}));
  CHECK(call.delta_c == 0.0);
  const double h = 1e-5;
  const Quote dig = bs_benchmark_quote(PayoffKind::Digital, 0.7, 1.05, 1.0, 0.2, 0.01);
  const double fd = (bs_digital_price({0.7, 1.05 + h, 0.2, 0.01, 1.0}) - bs_digital_price({0.7, 1.05 - h, 0.2, 0.01, 1.0})) /
                    (2 * h);
  CHECK(dig.delta_x == doctest::Approx(fd).epsilon(1e-7));
  const Quote sq = bs_benchmark_quote(PayoffKind::Square, 0.7, 1.05, 1.0, 0.2, 0.0);
  const double fd_sq =
      (bs_square_price({0.7, 1.05 + h, 0.2, 0.0, 1.0}) - bs_square_price({0.7, 1.05 - h, 0.2, 0.0, 1.0})) / (2 * h);
  CHECK(sq.delta_x == doctest::Approx(fd_sq).epsilon(1e-7));
  CHECK_THROWS(bs_benchmark_quote(PayoffKind::EquinoxFull, 0.7, 1.0, 1.0, 0.2, 0.0));
}

TEST_CASE("evaluation is deterministic and consistent with the pricer") {
  const EvalSetup s = small_setup();
  const auto model = small_model(7);
  const Evaluation a = evaluate(*model, s);
  const Evaluation b = evaluate(*model, s);
  CHECK(a.network.samples == b.network.samples);
  CHECK(a.benchmark.samples == b.benchmark.samples);
  CHECK(a.network.normalization == bs_normalization(s));
  CHECK(a.network.normalization == bs_call_price({0.5, 1.0, 0.2, 0.0, 1.0}));

  Eigen::Index first = 0;
  const ContractTerms terms = s.terms();
  for_each_path_block(s, [&](const PathSet& paths) {
    for (Eigen::Index i = 0; i < paths.size(); ++i) {
      const double g = eval_payoff(PayoffKind::Call, terms, paths.x(10, i));
      CHECK(a.network.samples[first + i] == pnl_per_path(*model, paths, i, terms, g));
      CHECK(a.benchmark.samples[first + i] == bs_benchmark_pnl(paths, i, PayoffKind::Call, terms, 0.2, g));
    }
    first += paths.size();
  });
  CHECK(first == s.n_paths);

  EvalSetup one = s;
  one.n_paths = 1;
  CHECK(evaluate(*model, one).network.stats.sd == 0.0);
  CHECK(evaluate(*model, one).network.samples[0] == a.network.samples[0]);
}

TEST_CASE("evaluation rejects a model for another payoff or horizon") {
  EvalSetup s = small_setup();
  s.payoff = PayoffSpec::digital(1.0);
  CHECK_THROWS(evaluate(*small_model(1), s));
  CHECK_THROWS(evaluate(*small_model(1, 1.0), small_setup()));
}

TEST_CASE("robustness grid") {
  const EvalSetup s = small_setup();
  std::vector<std::pair<double, std::shared_ptr<const PricedModel>>> models{{0.0, small_model(1)},
                                                                            {0.5, small_model(2)},
                                                                            {2.0, small_model(3)}};
  const std::vector<double> lambdas{0.0, 0.5, 2.0};
  const auto cells = robustness_grid(models, lambdas, s);
  REQUIRE(cells.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) {
    CHECK(cells[k].train_lambda == lambdas[k / 3]);
    CHECK(cells[k].test_lambda == lambdas[k % 3]);
  }
  const Evaluation diag = evaluate(*models[1].second, [&] {
    EvalSetup t = s;
    t.market.jump_lambda = 0.5;
    return t;
  }());
  CHECK(cells[4].stats.sd == diag.network.stats.sd);
  const Evaluation plain = evaluate(*models[2].second, s);
  CHECK(cells[6].stats.mean == plain.network.stats.mean);

  const auto again = robustness_grid(models, lambdas, s);
  std::ostringstream x, y;
  write_robustness_csv(cells, x);
  write_robustness_csv(again, y);
  CHECK(x.str() == y.str());
  const auto rows = lines(x.str());
  CHECK(rows.size() == 10);
  CHECK(rows[0] == "train_lambda,test_lambda,mean,sd,q01,q10,q90,q99");
}

TEST_CASE("report files") {
  Eigen::VectorXd v(5);
  v << -0.02, 0.01, 0.0, 0.03, -0.01;
  const PnLReport r = pnl_stats(v, 0.1, "net");
  std::ostringstream samples, stats, hist;
  write_pnl_samples_csv(r, samples);
  write_pnl_stats_csv(r, stats);
  write_histogram_csv(r, hist);
  const auto s = lines(samples.str());
  CHECK(s.size() == 6);
  CHECK(s[0] == "pnl");
  const auto st = lines(stats.str());
  CHECK(st[0].rfind("# normalization=0.1", 0) == 0);
  CHECK(st[1] == "metric,value_pct");
  CHECK(st.size() == 9);
  CHECK(st[2].rfind("mean,", 0) == 0);
  const auto h = lines(hist.str());
  CHECK(h.size() == 102);
  CHECK(h[0] == "bin_left,bin_right,count");
  long total = 0;
  for (std::size_t k = 1; k < h.size(); ++k) total += std::stol(h[k].substr(h[k].rfind(',') + 1));
  CHECK(total == 5);
}
