#include <doctest.h>

#include <cmath>
#include <functional>

#include "deephedge/losses.hpp"
#include "deephedge/rng.hpp"

using namespace dh;

namespace {

HedgingDataset dataset(const TimeGrid& grid, Eigen::Index n, double r, PayoffKind kind = PayoffKind::Call) {
  ModelParams mp;
  mp.r = r;
  HedgingDataset d;
  d.paths = overlay_tradable_call(simulate_paths(mp, grid, n, MarketState::defaults_for(mp), 31), 1.2);
  d.kind = kind;
  d.terms.assign(n, ContractTerms{1.2, 1.0, 0.0, 0.0, 0.0});
  d.target.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.target[i] = eval_payoff(kind, d.terms[i], d.paths.x(grid.steps, i));
  return d;
}

HedgingDataset hand_path(double r, double dt) {
  HedgingDataset d;
  d.paths.grid = TimeGrid{dt, 1};
  d.paths.params.r = r;
  d.paths.x.resize(2, 1);
  d.paths.x << 1.0, 1.2;
  d.paths.sigma = Eigen::MatrixXd::Constant(2, 1, 0.2);
  d.paths.p = Eigen::MatrixXd::Zero(2, 1);
  d.paths.c = Eigen::MatrixXd::Zero(2, 1);
  d.terms.assign(1, ContractTerms{});
  d.target = Eigen::VectorXd::Constant(1, 0.6);
  return d;
}

// Quoter defined by plain functions of (tau, x, c).
struct FnQuoter {
  double T;
  std::function<Quote(double, double, double)> fn;

  double horizon() const { return T; }
  PathQuotes quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c,
                        const ContractTerms&) const {
    PathQuotes q{Eigen::ArrayXd(tau.size()), Eigen::ArrayXd(tau.size()), Eigen::ArrayXd(tau.size())};
    for (Eigen::Index k = 0; k < tau.size(); ++k) {
      const Quote v = fn(tau[k], x[k], c[k]);
      q.price[k] = v.price;
      q.delta_x[k] = v.delta_x;
      q.delta_c[k] = v.delta_c;
    }
    return q;
  }
};

// Model price shifted by b(tau) = (T - tau) / T; hedges unchanged.
struct Shifted {
  const PricedModel& base;

  double horizon() const { return base.horizon(); }
  PathQuotes quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c,
                        const ContractTerms& terms) const {
    PathQuotes q = base.quote_path(tau, x, c, terms);
    q.price += (base.horizon() - tau) / base.horizon();
    return q;
  }
};

PricedModel random_model(Architecture arch, double horizon, std::uint64_t seed) {
  NetworkParams net = init_params(default_shape(PayoffKind::Call, 2, 8), seed);
  for (Eigen::Index k = 0; k < net.theta.size(); ++k) net.theta[k] += 0.05 * std::sin(1.0 + k);
  return make_priced_model(arch, PayoffSpec::call(1.0), ModelParams{}, std::move(net), horizon);
}

}  // namespace

TEST_CASE("one-step self-financing residual by hand") {
  const NodeQuote<double> now{0.5, 0.2, 0.0}, next{0.6, 0.0, 0.0};
  const double res = sf_residual(now, next, 1.0, 0.0, 1.2, 0.0, 1.0);
  CHECK(res == doctest::Approx(-0.06).epsilon(1e-14));
  CHECK(square(res) == doctest::Approx(3.6e-3).epsilon(1e-12));

  const double grown = sf_residual(now, next, 1.0, 0.0, 1.2, 0.0, std::exp(0.1));
  CHECK(grown == doctest::Approx(0.3 * std::exp(0.1) + 0.24 - 0.6).epsilon(1e-14));

  const NodeQuote<double> with_call{0.5, 0.2, 0.5};
  CHECK(sf_residual(with_call, next, 1.0, 0.1, 1.2, 0.3, 1.0) == doctest::Approx(-0.06 + 0.5 * 0.2).epsilon(1e-14));
}

TEST_CASE("dataset losses on a hand path") {
  const FnQuoter q{1.0, [](double tau, double, double) {
                     return tau > 0 ? Quote{0.5, 0.2, 0.0} : Quote{0.6, 0.0, 0.0};
                   }};
  SUBCASE("r = 0") {
    const HedgingDataset d = hand_path(0.0, 1.0);
    const LossComponents l = evaluate_losses(q, d, all_paths_batch(d));
    CHECK(l.sf == doctest::Approx(3.6e-3).epsilon(1e-12));
    CHECK(l.pl == doctest::Approx(3.6e-3).epsilon(1e-12));
    CHECK(l.terminal == 0.0);
  }
  SUBCASE("r = 0.1") {
    const HedgingDataset d = hand_path(0.1, 1.0);
    const LossComponents l = evaluate_losses(q, d, all_paths_batch(d));
    const double sf = 0.3 * std::exp(0.1) + 0.24 - 0.6;
    // N0 e^{rT} + D (X1 - X0 e^{rT}) - g
    const double pl = 0.5 * std::exp(0.1) + 0.2 * (1.2 - std::exp(0.1)) - 0.6;
    CHECK(l.sf == doctest::Approx(sf * sf).epsilon(1e-12));
    CHECK(l.pl == doctest::Approx(pl * pl).epsilon(1e-12));
  }
  SUBCASE("no trading") {
    const FnQuoter idle{1.0, [](double, double, double) { return Quote{0.45, 0.0, 0.0}; }};
    const HedgingDataset d = hand_path(0.0, 1.0);
    CHECK(pl_loss(idle, d, all_paths_batch(d)) == doctest::Approx(0.15 * 0.15).epsilon(1e-12));
  }
}

TEST_CASE("unconstrained zero network terminal loss") {
  HedgingDataset d = hand_path(0.0, 1.0);
  d.paths.x(1, 0) = 1.3;
  d.target[0] = 0.3;
  const NetworkParams net(default_shape(PayoffKind::Call, 2, 4));
  const PricedModel m = make_priced_model(Architecture::Unconstrained, PayoffSpec::call(1.0), ModelParams{}, net, 1.0);
  CHECK(terminal_loss(m, d, all_paths_batch(d)) == doctest::Approx(0.09).epsilon(1e-14));
}

TEST_CASE("composite loss") {
  LossConfig cfg;
  const LossComponents parts{0.01, 0.02, 0.001};
  CHECK(composite_loss(cfg, parts) == doctest::Approx(0.071).epsilon(1e-14));
  CHECK(composite_loss(cfg, LossComponents{}) == 0.0);
  cfg.kind = LossKind::ProfitAndLoss;
  cfg.lambda_terminal = 0.0;
  CHECK(composite_loss(cfg, parts) == 0.02);
  cfg.kind = LossKind::SelfFinancing;
  cfg.lambda_terminal = 2.0;
  CHECK(composite_loss(cfg, parts) == doctest::Approx(0.012));
  for (LossKind k : {LossKind::SelfFinancing, LossKind::ProfitAndLoss, LossKind::Combined}) {
    CHECK(parse_loss_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_loss_kind("cvar"), std::invalid_argument);
  LossConfig bad;
  bad.sf_weight = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.sf_weight = 0.0;
  bad.pl_weight = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("static replication has zero loss") {
  const HedgingDataset d = dataset(TimeGrid{1.0, 20}, 50, 0.0);
  HedgingDataset forward_contract = d;
  for (Eigen::Index i = 0; i < d.size(); ++i) forward_contract.target[i] = d.paths.x(20, i);
  const FnQuoter q{1.0, [](double, double x, double) { return Quote{x, 1.0, 0.0}; }};
  const LossComponents l = evaluate_losses(q, forward_contract, all_paths_batch(forward_contract));
  CHECK(l.sf == 0.0);
  CHECK(l.pl <= 1e-30);
  CHECK(l.terminal == 0.0);
}

TEST_CASE("P&L loss is invariant to a price shift vanishing at inception") {
  for (double r : {0.0, 0.05}) {
    const HedgingDataset d = dataset(TimeGrid{1.0, 25}, 40, r);
    const PricedModel m = random_model(Architecture::ZeroTarget, 1.0, 8);
    const LossBatch batch = all_paths_batch(d);
    const LossComponents a = evaluate_losses(m, d, batch);
    const LossComponents b = evaluate_losses(Shifted{m}, d, batch);
    CHECK(std::abs(a.pl - b.pl) <= 1e-12 * a.pl);
    CHECK(b.terminal > a.terminal);
    CHECK(a.sf != b.sf);
  }
}

TEST_CASE("single step: self-financing and P&L residuals agree") {
  const HedgingDataset d = dataset(TimeGrid{1.0, 1}, 30, 0.0);
  const PricedModel m = random_model(Architecture::Constrained, 1.0, 4);
  const LossComponents l = evaluate_losses(m, d, all_paths_batch(d));
  CHECK(l.terminal == 0.0);
  CHECK(l.sf == doctest::Approx(l.pl).epsilon(1e-12));
}

TEST_CASE("pair batches cover the same residuals as full paths") {
  const HedgingDataset d = dataset(TimeGrid{1.0, 5}, 6, 0.02);
  const PricedModel m = random_model(Architecture::Unconstrained, 1.0, 6);
  std::vector<std::pair<Eigen::Index, int>> pairs;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (int j = 0; j < 5; ++j) pairs.emplace_back(i, j);
  }
  const LossComponents full = evaluate_losses(m, d, all_paths_batch(d));
  const LossComponents paired = evaluate_losses(m, d, pair_batch(d, pairs));
  CHECK(paired.sf == doctest::Approx(full.sf).epsilon(1e-12));
  CHECK(paired.terminal == doctest::Approx(full.terminal).epsilon(1e-12));
  CHECK(paired.pl == 0.0);
  CHECK_THROWS_AS(pl_loss(m, d, pair_batch(d, pairs)), std::invalid_argument);

  const LossComponents sub = evaluate_losses(m, d, full_path_batch(d, {2, 2}));
  const LossComponents one = evaluate_losses(m, d, full_path_batch(d, {2}));
  CHECK(sub.pl == doctest::Approx(one.pl).epsilon(1e-14));
}

TEST_CASE("losses are nonnegative and horizon is checked") {
  const HedgingDataset d = dataset(TimeGrid{1.0, 10}, 10, 0.0);
  const PricedModel m = random_model(Architecture::ControlVariate, 1.0, 2);
  const LossComponents l = evaluate_losses(m, d, all_paths_batch(d));
  CHECK(l.sf >= 0.0);
  CHECK(l.pl >= 0.0);
  CHECK(l.terminal >= 0.0);
  const PricedModel wrong = random_model(Architecture::ControlVariate, 2.0, 2);
  CHECK_THROWS_AS(evaluate_losses(wrong, d, all_paths_batch(d)), std::invalid_argument);
}
