#pragma once

#include <Eigen/Dense>

#include "deephedge/mlp.hpp"

namespace dh {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long step = 0;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;

  AdamState() = default;
  AdamState(Eigen::Index size, const AdamConfig& cfg);
};

/// One bias-corrected Adam update at the configured learning rate.
void adam_step(AdamState& state, NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& grad);

/// Same, with the learning rate overridden (used by step schedules).
void adam_step(AdamState& state, NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               double learning_rate);

}  // namespace dh
