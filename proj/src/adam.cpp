#include "deephedge/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dh {

AdamState::AdamState(Eigen::Index size, const AdamConfig& cfg)
    : config(cfg), first_moment(Eigen::VectorXd::Zero(size)), second_moment(Eigen::VectorXd::Zero(size)) {}

void adam_step(AdamState& state, NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
  adam_step(state, params, grad, state.config.learning_rate);
}

void adam_step(AdamState& state, NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               double learning_rate) {
  if (grad.size() != params.theta.size() || state.first_moment.size() != params.theta.size()) {
    throw std::invalid_argument("adam_step: gradient, moments and theta lengths differ");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  state.first_moment = c.beta1 * state.first_moment + (1.0 - c.beta1) * grad;
  state.second_moment = c.beta2 * state.second_moment + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  if (learning_rate == 0.0) return;
  params.theta.array() -= learning_rate * (state.first_moment.array() / correction1) /
                          ((state.second_moment.array() / correction2).sqrt() + c.epsilon);
}

}  // namespace dh
