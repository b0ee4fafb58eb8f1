#pragma once

#include <Eigen/Dense>

#include <vector>

#include "deephedge/market_sim.hpp"
#include "deephedge/payoffs.hpp"

namespace dh {

/// Simulated paths with per-path contract terms and the value each path must
/// reach at the last grid node.
struct HedgingDataset {
  PathSet paths;  // tradable call overlaid
  PayoffKind kind = PayoffKind::Call;
  std::vector<ContractTerms> terms;
  Eigen::VectorXd target;

  Eigen::Index size() const { return paths.size(); }
  double horizon() const { return paths.grid.t_end; }
  int steps() const { return paths.grid.steps; }
  int start(Eigen::Index i) const { return paths.start_step.size() > 0 ? paths.start_step[i] : 0; }

  /// Throws std::invalid_argument when array sizes disagree or the call is missing.
  void validate() const;
};

}  // namespace dh
