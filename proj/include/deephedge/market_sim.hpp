#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace dh {

/// Coefficients of the stochastic volatility / stochastic correlation model
///   dX = mu X dt + Sigma X dW1
///   dSigma = -a (Sigma - sigma_circ) dt + xi Sigma^gamma d(rho W1 + sqrt(1-rho^2) W2) + kappa dN
///   dP = -b (P - p_circ) dt + chi dW3,   rho = tanh(P)
/// with N a Poisson process of intensity jump_lambda.
struct ModelParams {
  double mu = 0.0;
  double a = 5.0;
  double sigma_circ = 0.2;
  double xi = 0.5;
  double gamma = 0.7;
  double b = 5.0;
  double p_circ = -0.3;
  double chi = 0.5;
  double r = 0.0;
  double jump_lambda = 0.0;
  double jump_kappa = 0.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Uniform grid t_j = j * t_end / steps, j = 0..steps.
struct TimeGrid {
  double t_end = 2.0;
  int steps = 100;

  static constexpr double kDefaultStepsPerYear = 50.0;

  /// Grid with round(50 * t_end) steps (at least one).
  static TimeGrid with_default_density(double t_end);

  double dt() const { return t_end / steps; }
  double node(int j) const { return j == steps ? t_end : j * t_end / steps; }
  void validate() const;
};

struct MarketState {
  double x = 1.0;
  double sigma = 0.2;
  double p = -0.3;

  double rho() const;

  /// x = 1, sigma = sigma_circ, p = p_circ.
  static MarketState defaults_for(const ModelParams& params);
};

/// Standard normal shocks and jump count driving one time step.
struct StepShocks {
  double spot = 0.0;    // xi_1, drives W1
  double vol = 0.0;     // xi_2, independent part of the volatility shock
  double driver = 0.0;  // xi_3, drives W3
  int jumps = 0;
};

/// One step of the scheme: exact lognormal step for X with Sigma frozen at the
/// left node, Euler-Maruyama with full truncation for Sigma, Euler-Maruyama
/// for the correlation driver. Jumps add jumps * kappa to Sigma after the
/// diffusion update.
MarketState advance_state(const ModelParams& params, const MarketState& state, double dt,
                          const StepShocks& shocks);

/// Simulated trajectories. Matrices are (steps + 1) x n, one column per path.
struct PathSet {
  TimeGrid grid;
  ModelParams params;
  std::uint64_t seed = 0;
  Eigen::MatrixXd x;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd p;
  Eigen::MatrixXd c;          // tradable call price, empty until overlaid
  Eigen::VectorXi jumps;      // total jump count per path
  Eigen::VectorXi start_step; // first simulated node per path (0 unless random start dates)
  double call_strike = 0.0;  // 0 when strikes differ per path
  double call_maturity = 0.0;

  Eigen::Index size() const { return x.cols(); }
  bool has_call() const { return c.size() > 0; }
};

/// n independent paths starting from init at t = 0. Path i draws from
/// substream (seed, first_index + i), so a block of paths reproduces the
/// corresponding columns of a larger simulation.
PathSet simulate_paths(const ModelParams& params, const TimeGrid& grid, Eigen::Index n,
                       const MarketState& init, std::uint64_t seed, Eigen::Index first_index = 0);

/// Paths that start at node start_step[i] from init; earlier nodes hold init.
PathSet simulate_paths_from(const ModelParams& params, const TimeGrid& grid,
                            const Eigen::Ref<const Eigen::VectorXi>& start_step,
                            const MarketState& init, std::uint64_t seed,
                            Eigen::Index first_index = 0);

/// Sets c(j) = BS(maturity - t_j, x_j, sigma_j, r, strike) at every node.
/// maturity defaults to the grid horizon; it may exceed it (rolled contracts).
PathSet overlay_tradable_call(PathSet paths, double strike, std::optional<double> maturity = {});
/// Same with one strike per path; call_strike is left at 0.
PathSet overlay_tradable_call(PathSet paths, const Eigen::Ref<const Eigen::VectorXd>& strikes,
                              std::optional<double> maturity = {});

/// CSV with header `path,step,t,x,sigma,p,c`, path-major.
void write_paths_csv(const PathSet& paths, std::ostream& out);

}  // namespace dh
