#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "deephedge/errors.hpp"
#include "deephedge/mlp.hpp"

namespace dh {

class GradTape;

/// Scalar on a GradTape. A Var without a tape is a constant.
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT: implicit by design of generic code

  double value() const { return value_; }
  bool is_constant() const { return tape_ == nullptr; }

  friend Var operator+(const Var& a, const Var& b);
  friend Var operator-(const Var& a, const Var& b);
  friend Var operator*(const Var& a, const Var& b);
  friend Var operator/(const Var& a, double b);
  friend Var operator-(const Var& a);
  friend Var exp(const Var& a);

  Var& operator+=(const Var& b) { return *this = *this + b; }
  Var& operator-=(const Var& b) { return *this = *this - b; }
  Var& operator*=(const Var& b) { return *this = *this * b; }

 private:
  friend class GradTape;
  Var(GradTape* tape, int index, double value) : tape_(tape), index_(index), value_(value) {}

  GradTape* tape_ = nullptr;
  int index_ = -1;
  double value_ = 0.0;
};

inline Var square(const Var& a) { return a * a; }
inline double square(double a) { return a * a; }

/// Minimal reverse-mode tape for scalar objectives: +, -, *, scaling, exp.
class GradTape {
 public:
  void reserve(std::size_t nodes) { nodes_.reserve(nodes); }
  std::size_t size() const { return nodes_.size(); }

  Var variable(double value);

  /// Adjoint of `output` with respect to every node on the tape.
  std::vector<double> adjoints(const Var& output) const;

 private:
  friend class Var;
  friend Var operator+(const Var&, const Var&);
  friend Var operator-(const Var&, const Var&);
  friend Var operator*(const Var&, const Var&);
  friend Var operator/(const Var&, double);
  friend Var operator-(const Var&);
  friend Var exp(const Var&);

  struct Node {
    int lhs;
    int rhs;
    double d_lhs;
    double d_rhs;
  };

  Var push(double value, int lhs, double d_lhs, int rhs, double d_rhs);

  std::vector<Node> nodes_;
};

/// Values and input gradients of the network at a batch of probe inputs,
/// exposed as tape leaves.
class ProbeSet {
 public:
  ProbeSet(GradTape& tape, const BatchEvaluation& evaluation);

  Eigen::Index size() const { return count_; }
  Eigen::Index inputs() const { return inputs_; }
  const Var& value(Eigen::Index k) const { return leaves_[k * (inputs_ + 1)]; }
  const Var& grad(Eigen::Index k, Eigen::Index i) const { return leaves_[k * (inputs_ + 1) + 1 + i]; }

 private:
  Eigen::Index count_;
  Eigen::Index inputs_;
  std::vector<Var> leaves_;
};

struct ParamGradResult {
  double objective = 0.0;
  Eigen::VectorXd gradient;
};

namespace detail {

void check_probes_finite(const BatchEvaluation& evaluation);
ParamGradResult finish_param_grad(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                  const BatchEvaluation& evaluation, const GradTape& tape, const Var& objective);

}  // namespace detail

/// Exact gradient with respect to theta of a scalar objective built from
/// network values and input gradients at the probe inputs (one per column).
/// `objective` is called as objective(const ProbeSet&) and returns a Var.
template <class Objective>
ParamGradResult param_grad(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& probe_inputs,
                           Objective&& objective) {
  const BatchEvaluation evaluation = evaluate_batch(params, probe_inputs);
  detail::check_probes_finite(evaluation);
  GradTape tape;
  tape.reserve(static_cast<std::size_t>(probe_inputs.cols() * (probe_inputs.rows() + 1) * 8));
  const ProbeSet probes(tape, evaluation);
  const Var result = objective(probes);
  return detail::finish_param_grad(params, probe_inputs, evaluation, tape, result);
}

}  // namespace dh
