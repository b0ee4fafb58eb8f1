#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "deephedge/market_sim.hpp"
#include "deephedge/rng.hpp"
#include "oracles.hpp"

using namespace dh;

namespace {

struct Moments {
  double mean;
  double variance;
  double standard_error;
};

Moments moments(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double mean = v.mean();
  const double var = (v.array() - mean).square().mean();
  return {mean, var, std::sqrt(var / static_cast<double>(v.size()))};
}

ModelParams table1() { return ModelParams{}; }

ModelParams near_constant_vol() {
  ModelParams p;
  p.xi = 1e-12;
  p.chi = 1e-12;
  return p;
}

}  // namespace

TEST_CASE("degenerate vol reproduces GBM moments") {
  const ModelParams params = near_constant_vol();
  const TimeGrid grid{1.0, 50};
  const PathSet paths = simulate_paths(params, grid, 100000, MarketState{1.0, 0.2, -0.3}, 7);
  const Moments xt = moments(paths.x.row(grid.steps));
  CHECK(std::abs(xt.mean - 1.0) < 3.0 * xt.standard_error);
  const Eigen::RowVectorXd logs = paths.x.row(grid.steps).array().log().matrix();
  const Moments lg = moments(logs);
  CHECK(std::abs(lg.mean - (-0.02)) < 3.0 * lg.standard_error);
  // Variance of the log: 0.04; its standard error is about sqrt(2/n) * 0.04.
  CHECK(std::abs(lg.variance - 0.04) < 3.0 * std::sqrt(2.0 / 100000.0) * 0.04);
  CHECK((paths.sigma.array() - 0.2).abs().maxCoeff() < 1e-9);
}

TEST_CASE("zero drift keeps X a martingale under table parameters") {
  const ModelParams params = table1();
  const TimeGrid grid{2.0, 100};
  const PathSet paths = simulate_paths(params, grid, 100000, MarketState::defaults_for(params), 99);
  const Moments xt = moments(paths.x.row(grid.steps));
  CHECK(std::abs(xt.mean - 1.0) < 3.0 * xt.standard_error);
  CHECK(paths.x.minCoeff() > 0.0);
  CHECK(paths.p.array().tanh().abs().maxCoeff() < 1.0);

  // Vol fluctuates around sigma_circ, correlation around tanh(p_circ).
  const double mean_sigma = paths.sigma.bottomRows(50).mean();
  CHECK(mean_sigma == doctest::Approx(0.2).epsilon(0.1));
  const double mean_p = paths.p.bottomRows(50).mean();
  CHECK(mean_p == doctest::Approx(-0.3).epsilon(0.05));
  const double mean_rho = paths.p.bottomRows(50).array().tanh().mean();
  CHECK(std::abs(mean_rho - std::tanh(-0.3)) < 0.02);
}

TEST_CASE("jump counts are Poisson(lambda T)") {
  ModelParams params = table1();
  params.jump_lambda = 2.0;
  params.jump_kappa = 0.1;
  const PathSet paths = simulate_paths(params, TimeGrid{2.0, 100}, 10000, MarketState::defaults_for(params), 5);
  const Eigen::RowVectorXd counts = paths.jumps.cast<double>().transpose();
  const Moments m = moments(counts);
  CHECK(std::abs(m.mean - 4.0) < 3.0 * m.standard_error);
  // Poisson variance equals the mean; standard error of the sample variance ~ sqrt((mu4 - s^4)/n).
  const double mu4 = 4.0 + 3.0 * 16.0;
  CHECK(std::abs(m.variance - 4.0) < 3.0 * std::sqrt((mu4 - 16.0) / 10000.0));
}

TEST_CASE("seed determinism and substreams") {
  const ModelParams params = table1();
  const TimeGrid grid{1.0, 20};
  const MarketState init = MarketState::defaults_for(params);
  const PathSet a = simulate_paths(params, grid, 50, init, 123);
  const PathSet b = simulate_paths(params, grid, 50, init, 123);
  CHECK(a.x == b.x);
  CHECK(a.sigma == b.sigma);
  CHECK(a.p == b.p);
  const PathSet fewer = simulate_paths(params, grid, 10, init, 123);
  CHECK(fewer.x == a.x.leftCols(10));
  const PathSet block = simulate_paths(params, grid, 20, init, 123, 30);
  CHECK(block.x == a.x.rightCols(20));
  const PathSet other = simulate_paths(params, grid, 50, init, 124);
  CHECK(other.x != a.x);
}

TEST_CASE("invalid simulation requests are rejected") {
  const ModelParams params = table1();
  const TimeGrid grid{1.0, 10};
  CHECK_THROWS_AS(simulate_paths(params, grid, 0, MarketState{}, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_paths(params, grid, 5, MarketState{0.0, 0.2, 0.0}, 1), std::invalid_argument);
  ModelParams bad = params;
  bad.xi = NAN;
  CHECK_THROWS_AS(simulate_paths(bad, grid, 5, MarketState{}, 1), std::invalid_argument);
  bad = params;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(simulate_paths(bad, grid, 5, MarketState{}, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_paths(params, TimeGrid{1.0, 0}, 5, MarketState{}, 1), std::invalid_argument);
}

TEST_CASE("full truncation keeps a negative vol real") {
  ModelParams params = table1();
  const MarketState state{1.0, -0.05, 0.0};
  const MarketState next = advance_state(params, state, 0.01, StepShocks{0.5, -0.3, 0.1, 0});
  CHECK(std::isfinite(next.sigma));
  // With sigma < 0 the diffusion vanishes and only the drift acts.
  CHECK(next.sigma == doctest::Approx(-0.05 - 5.0 * (-0.05 - 0.2) * 0.01));
  const MarketState jumped = advance_state(params, state, 0.01, StepShocks{0.5, -0.3, 0.1, 2});
  CHECK(jumped.sigma == doctest::Approx(next.sigma));
  ModelParams with_kappa = table1();
  with_kappa.jump_kappa = 0.1;
  CHECK(advance_state(with_kappa, state, 0.01, StepShocks{0.5, -0.3, 0.1, 2}).sigma ==
        doctest::Approx(next.sigma + 0.2));
}

TEST_CASE("grid refinement with matched increments converges") {
  // Fine grid with 4m steps; coarser grids aggregate the same Brownian increments.
  const ModelParams params = table1();
  const int m = 25;
  const double horizon = 1.0;
  const int n = 2000;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  Eigen::VectorXd terminal[3];
  for (auto& t : terminal) t.resize(n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd z(3, 4 * m);
    for (int k = 0; k < 4 * m; ++k)
      for (int c = 0; c < 3; ++c) z(c, k) = normal(rng);
    for (int level = 0; level < 3; ++level) {
      const int factor = 1 << (2 - level);  // 4, 2, 1 fine increments per step
      const int steps = 4 * m / factor;
      const double dt = horizon / steps;
      MarketState s = MarketState::defaults_for(params);
      for (int k = 0; k < steps; ++k) {
        Eigen::Vector3d agg = z.middleCols(k * factor, factor).rowwise().sum() / std::sqrt(double(factor));
        s = advance_state(params, s, dt, StepShocks{agg[0], agg[1], agg[2], 0});
      }
      terminal[level][i] = s.sigma;
    }
  }
  const double coarse_gap = std::sqrt((terminal[0] - terminal[1]).squaredNorm() / n);
  const double fine_gap = std::sqrt((terminal[1] - terminal[2]).squaredNorm() / n);
  CHECK(coarse_gap < 0.01);
  CHECK(fine_gap < coarse_gap);
}

TEST_CASE("tradable call overlay") {
  ModelParams params = table1();
  const TimeGrid grid{1.0, 4};
  PathSet paths = simulate_paths(params, grid, 3, MarketState{1.0, 0.2, -0.3}, 1);
  paths = overlay_tradable_call(paths, 1.2);
  REQUIRE(paths.has_call());
  for (Eigen::Index i = 0; i < paths.size(); ++i) {
    CHECK(paths.c(grid.steps, i) == std::max(paths.x(grid.steps, i) - 1.2, 0.0));
    for (int j = 0; j <= grid.steps; ++j) {
      CHECK(paths.c(j, i) >= std::max(paths.x(j, i) - 1.2, 0.0) - 1e-12);
    }
  }
  CHECK(paths.c(0, 0) == doctest::Approx(oracle::call_by_quadrature(1.0, 1.0, 0.2, 0.0, 1.2)).epsilon(1e-8));

  PathSet manual = paths;
  manual.x(0, 0) = 1.0;
  manual.sigma(0, 0) = 0.2;
  manual = overlay_tradable_call(manual, 1.0);
  CHECK(std::abs(manual.c(0, 0) - oracle::call_by_quadrature(1.0, 1.0, 0.2, 0.0, 1.0)) < 1e-8);
  manual.x(grid.steps, 0) = 1.3;
  manual = overlay_tradable_call(manual, 1.2);
  CHECK(manual.c(grid.steps, 0) == doctest::Approx(0.1));
  manual.sigma(0, 0) = 0.0;
  manual = overlay_tradable_call(manual, 1.2);
  CHECK(manual.c(0, 0) == 0.0);

  const PathSet rolled = overlay_tradable_call(paths, 1.0, 3.0);
  CHECK(rolled.call_maturity == 3.0);
  CHECK(rolled.c(grid.steps, 0) > std::max(rolled.x(grid.steps, 0) - 1.0, 0.0));
  CHECK_THROWS_AS(overlay_tradable_call(paths, 0.0), std::invalid_argument);
}

TEST_CASE("path CSV export") {
  const ModelParams params = table1();
  PathSet paths = overlay_tradable_call(simulate_paths(params, TimeGrid{1.0, 2}, 2, MarketState{}, 3), 1.2);
  std::ostringstream out;
  write_paths_csv(paths, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "path,step,t,x,sigma,p,c");
  int rows = 0;
  std::string first;
  while (std::getline(in, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  CHECK(rows == 6);
  CHECK(first.rfind("0,0,0,1,", 0) == 0);
}
