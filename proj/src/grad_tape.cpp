#include "deephedge/grad_tape.hpp"

#include <cmath>
#include <string>

namespace dh {

Var GradTape::variable(double value) { return push(value, -1, 0.0, -1, 0.0); }

Var GradTape::push(double value, int lhs, double d_lhs, int rhs, double d_rhs) {
  nodes_.push_back(Node{lhs, rhs, d_lhs, d_rhs});
  return Var(this, static_cast<int>(nodes_.size() - 1), value);
}

std::vector<double> GradTape::adjoints(const Var& output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output.is_constant()) return adj;
  adj[output.index_] = 1.0;
  for (int k = output.index_; k >= 0; --k) {
    const double a = adj[k];
    if (a == 0.0) continue;
    const Node& node = nodes_[k];
    if (node.lhs >= 0) adj[node.lhs] += a * node.d_lhs;
    if (node.rhs >= 0) adj[node.rhs] += a * node.d_rhs;
  }
  return adj;
}

Var operator+(const Var& a, const Var& b) {
  GradTape* tape = a.tape_ != nullptr ? a.tape_ : b.tape_;
  if (tape == nullptr) return Var(a.value_ + b.value_);
  return tape->push(a.value_ + b.value_, a.index_, 1.0, b.index_, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  GradTape* tape = a.tape_ != nullptr ? a.tape_ : b.tape_;
  if (tape == nullptr) return Var(a.value_ - b.value_);
  return tape->push(a.value_ - b.value_, a.index_, 1.0, b.index_, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  GradTape* tape = a.tape_ != nullptr ? a.tape_ : b.tape_;
  if (tape == nullptr) return Var(a.value_ * b.value_);
  return tape->push(a.value_ * b.value_, a.index_, b.value_, b.index_, a.value_);
}

Var operator/(const Var& a, double b) {
  if (a.tape_ == nullptr) return Var(a.value_ / b);
  return a.tape_->push(a.value_ / b, a.index_, 1.0 / b, -1, 0.0);
}

Var operator-(const Var& a) {
  if (a.tape_ == nullptr) return Var(-a.value_);
  return a.tape_->push(-a.value_, a.index_, -1.0, -1, 0.0);
}

Var exp(const Var& a) {
  const double e = std::exp(a.value_);
  if (a.tape_ == nullptr) return Var(e);
  return a.tape_->push(e, a.index_, e, -1, 0.0);
}

ProbeSet::ProbeSet(GradTape& tape, const BatchEvaluation& evaluation)
    : count_(evaluation.values.size()), inputs_(evaluation.input_grads.rows()) {
  leaves_.reserve(static_cast<std::size_t>(count_ * (inputs_ + 1)));
  for (Eigen::Index k = 0; k < count_; ++k) {
    leaves_.push_back(tape.variable(evaluation.values[k]));
    for (Eigen::Index i = 0; i < inputs_; ++i) leaves_.push_back(tape.variable(evaluation.input_grads(i, k)));
  }
}

namespace detail {

void check_probes_finite(const BatchEvaluation& evaluation) {
  for (Eigen::Index k = 0; k < evaluation.values.size(); ++k) {
    if (!std::isfinite(evaluation.values[k]) || !evaluation.input_grads.col(k).allFinite()) {
      throw NumericError("non-finite network output at batch index " + std::to_string(k), k);
    }
  }
}

ParamGradResult finish_param_grad(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                  const BatchEvaluation& evaluation, const GradTape& tape, const Var& objective) {
  if (!std::isfinite(objective.value())) throw NumericError("non-finite objective value");
  const Eigen::Index count = evaluation.values.size();
  const Eigen::Index dim = evaluation.input_grads.rows();
  ParamGradResult result;
  result.objective = objective.value();
  if (objective.is_constant()) {
    result.gradient = Eigen::VectorXd::Zero(params.theta.size());
    return result;
  }
  // Leaves were the first nodes pushed, in probe order.
  const std::vector<double> adj = tape.adjoints(objective);
  Eigen::RowVectorXd value_adjoint(count);
  Eigen::MatrixXd grad_adjoint(dim, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const std::size_t base = static_cast<std::size_t>(k * (dim + 1));
    value_adjoint[k] = adj[base];
    for (Eigen::Index i = 0; i < dim; ++i) grad_adjoint(i, k) = adj[base + 1 + i];
  }
  for (Eigen::Index k = 0; k < count; ++k) {
    if (!std::isfinite(value_adjoint[k]) || !grad_adjoint.col(k).allFinite()) {
      throw NumericError("non-finite objective sensitivity at batch index " + std::to_string(k), k);
    }
  }
  result.gradient = second_order_param_grad(params, inputs, evaluation, value_adjoint, grad_adjoint);
  return result;
}

}  // namespace detail

}  // namespace dh
