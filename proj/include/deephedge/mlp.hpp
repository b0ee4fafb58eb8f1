#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace dh {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected tanh network R^inputs -> R with `hidden_layers` hidden
/// layers of `width` units. The affine maps are A_1 : R^inputs -> R^width,
/// hidden_layers - 1 maps R^width -> R^width, and A_out : R^width -> R.
struct NetworkShape {
  int inputs = 5;
  int hidden_layers = 3;
  int width = 32;

  /// (1 + inputs) width + (hidden_layers - 1) width (1 + width) + (1 + width).
  Eigen::Index param_count() const;
  void validate() const;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Flat parameter vector. Layout: for each affine map in order, the weight
/// matrix (out x in, row-major) followed by its bias vector.
struct NetworkParams {
  NetworkShape shape;
  Eigen::VectorXd theta;

  NetworkParams() = default;
  explicit NetworkParams(const NetworkShape& s);
  NetworkParams(const NetworkShape& s, Eigen::VectorXd values);
};

struct LayerView {
  Eigen::Map<const RowMajorMatrix> weights;
  Eigen::Map<const Eigen::VectorXd> bias;
};

/// Views of the affine maps, input layer first, output layer last.
std::vector<LayerView> layers(const NetworkParams& params);

/// Offset of each affine map inside theta (weights first, then bias).
std::vector<Eigen::Index> layer_offsets(const NetworkShape& shape);

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
NetworkParams init_params(const NetworkShape& shape, std::uint64_t seed);

/// Network values and input gradients for a batch of inputs (one per column),
/// together with the hidden activations needed by the second-order pass.
struct BatchEvaluation {
  Eigen::RowVectorXd values;                // 1 x batch
  Eigen::MatrixXd input_grads;              // inputs x batch
  std::vector<Eigen::MatrixXd> activations; // hidden_layers entries, width x batch
};

BatchEvaluation evaluate_batch(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& inputs);

double forward(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input);
Eigen::VectorXd input_grad(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input);

/// Gradient with respect to theta of
///   sum_k value_adjoint[k] * N(x_k) + grad_adjoint.col(k) . grad_x N(x_k),
/// i.e. of any objective once its sensitivities to the probe values and
/// probe input gradients are known. Computed by a tangent pass along the
/// gradient adjoints followed by a reverse pass through primal and tangent.
Eigen::VectorXd second_order_param_grad(const NetworkParams& params,
                                        const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                        const BatchEvaluation& evaluation,
                                        const Eigen::Ref<const Eigen::RowVectorXd>& value_adjoint,
                                        const Eigen::Ref<const Eigen::MatrixXd>& grad_adjoint);

}  // namespace dh
