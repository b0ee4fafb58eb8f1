#include "deephedge/market_sim.hpp"

#include "deephedge/analytics.hpp"
#include "deephedge/rng.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace dh {

namespace {

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

void ModelParams::validate() const {
  for (double v : {mu, a, sigma_circ, xi, gamma, b, p_circ, chi, r, jump_lambda, jump_kappa}) {
    require(std::isfinite(v), "model parameters must be finite");
  }
  require(a > 0.0, "model: a must be > 0");
  require(sigma_circ > 0.0, "model: sigma_circ must be > 0");
  require(xi > 0.0, "model: xi must be > 0");
  require(gamma >= 0.5 && gamma <= 1.0, "model: gamma must lie in [0.5, 1]");
  require(b > 0.0, "model: b must be > 0");
  require(chi > 0.0, "model: chi must be > 0");
  require(jump_lambda >= 0.0, "model: jump_lambda must be >= 0");
  require(jump_kappa >= 0.0, "model: jump_kappa must be >= 0");
}

TimeGrid TimeGrid::with_default_density(double t_end) {
  const int steps = std::max(1, static_cast<int>(std::lround(kDefaultStepsPerYear * t_end)));
  return TimeGrid{t_end, steps};
}

void TimeGrid::validate() const {
  require(std::isfinite(t_end) && t_end > 0.0, "grid: horizon must be finite and > 0");
  require(steps >= 1, "grid: steps must be >= 1");
}

double MarketState::rho() const { return std::tanh(p); }

MarketState MarketState::defaults_for(const ModelParams& params) {
  return MarketState{1.0, params.sigma_circ, params.p_circ};
}

MarketState advance_state(const ModelParams& params, const MarketState& state, double dt,
                          const StepShocks& shocks) {
  const double sqrt_dt = std::sqrt(dt);
  const double rho = std::tanh(state.p);
  const double vol = state.sigma;

  MarketState next;
  next.x = state.x * std::exp((params.mu - 0.5 * vol * vol) * dt + vol * sqrt_dt * shocks.spot);

  const double vol_shock = rho * shocks.spot + std::sqrt(1.0 - rho * rho) * shocks.vol;
  const double diffusion = params.xi * std::pow(std::max(vol, 0.0), params.gamma);
  next.sigma = vol - params.a * (vol - params.sigma_circ) * dt + diffusion * sqrt_dt * vol_shock +
               shocks.jumps * params.jump_kappa;

  next.p = state.p - params.b * (state.p - params.p_circ) * dt + params.chi * sqrt_dt * shocks.driver;
  return next;
}

PathSet simulate_paths(const ModelParams& params, const TimeGrid& grid, Eigen::Index n,
                       const MarketState& init, std::uint64_t seed, Eigen::Index first_index) {
  require(n > 0, "simulate_paths: n must be > 0");
  return simulate_paths_from(params, grid, Eigen::VectorXi::Zero(n), init, seed, first_index);
}

PathSet simulate_paths_from(const ModelParams& params, const TimeGrid& grid,
                            const Eigen::Ref<const Eigen::VectorXi>& start_step,
                            const MarketState& init, std::uint64_t seed, Eigen::Index first_index) {
  params.validate();
  grid.validate();
  const Eigen::Index n = start_step.size();
  require(n > 0, "simulate_paths: n must be > 0");
  require(std::isfinite(init.x) && std::isfinite(init.sigma) && std::isfinite(init.p),
          "simulate_paths: initial state must be finite");
  require(init.x > 0.0, "simulate_paths: initial spot must be > 0");
  require(start_step.minCoeff() >= 0 && start_step.maxCoeff() < grid.steps,
          "simulate_paths: start steps must lie in [0, steps)");

  const int m = grid.steps;
  const double dt = grid.dt();
  PathSet out;
  out.grid = grid;
  out.params = params;
  out.seed = seed;
  out.x.resize(m + 1, n);
  out.sigma.resize(m + 1, n);
  out.p.resize(m + 1, n);
  out.jumps = Eigen::VectorXi::Zero(n);
  out.start_step = start_step;

  for (Eigen::Index i = 0; i < n; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(first_index + i));
    std::normal_distribution<double> normal;
    std::poisson_distribution<int> poisson(params.jump_lambda * dt);
    const bool with_jumps = params.jump_lambda > 0.0;

    MarketState state = init;
    const int start = start_step[i];
    for (int j = 0; j <= start; ++j) {
      out.x(j, i) = state.x;
      out.sigma(j, i) = state.sigma;
      out.p(j, i) = state.p;
    }
    for (int j = start; j < m; ++j) {
      StepShocks shocks;
      shocks.spot = normal(rng);
      shocks.vol = normal(rng);
      shocks.driver = normal(rng);
      shocks.jumps = with_jumps ? poisson(rng) : 0;
      out.jumps[i] += shocks.jumps;
      state = advance_state(params, state, dt, shocks);
      out.x(j + 1, i) = state.x;
      out.sigma(j + 1, i) = state.sigma;
      out.p(j + 1, i) = state.p;
    }
  }
  return out;
}

PathSet overlay_tradable_call(PathSet paths, double strike, std::optional<double> maturity) {
  require(std::isfinite(strike) && strike > 0.0, "overlay_tradable_call: strike must be > 0");
  const Eigen::VectorXd strikes = Eigen::VectorXd::Constant(paths.size(), strike);
  paths = overlay_tradable_call(std::move(paths), strikes, maturity);
  paths.call_strike = strike;
  return paths;
}

PathSet overlay_tradable_call(PathSet paths, const Eigen::Ref<const Eigen::VectorXd>& strikes,
                              std::optional<double> maturity) {
  require(strikes.size() == paths.size(), "overlay_tradable_call: one strike per path expected");
  require(strikes.allFinite() && (strikes.array() > 0.0).all(), "overlay_tradable_call: strikes must be > 0");
  const double expiry = maturity.value_or(paths.grid.t_end);
  require(expiry >= paths.grid.t_end, "overlay_tradable_call: call must not expire inside the grid");
  const int m = paths.grid.steps;
  paths.c.resize(m + 1, paths.size());
  for (Eigen::Index i = 0; i < paths.size(); ++i) {
    for (int j = 0; j <= m; ++j) {
      const double tau = expiry == paths.grid.t_end && j == m ? 0.0 : expiry - paths.grid.node(j);
      // Full truncation carries over: a negative simulated vol prices as zero vol.
      const BsInputs in{tau, paths.x(j, i), std::max(paths.sigma(j, i), 0.0), paths.params.r, strikes[i]};
      paths.c(j, i) = bs_call_price(in);
    }
  }
  paths.call_strike = 0.0;
  paths.call_maturity = expiry;
  return paths;
}

void write_paths_csv(const PathSet& paths, std::ostream& out) {
  out << "path,step,t,x,sigma,p,c\n";
  out << std::setprecision(17);
  const int m = paths.grid.steps;
  for (Eigen::Index i = 0; i < paths.size(); ++i) {
    for (int j = 0; j <= m; ++j) {
      out << i << ',' << j << ',' << paths.grid.node(j) << ',' << paths.x(j, i) << ','
          << paths.sigma(j, i) << ',' << paths.p(j, i) << ',';
      if (paths.has_call()) out << paths.c(j, i);
      out << '\n';
    }
  }
}

}  // namespace dh
