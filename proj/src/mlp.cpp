#include "deephedge/mlp.hpp"

#include "deephedge/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dh {

namespace {

// tanh(z) = 1 - 2 / (exp(2z) + 1), evaluated on whole arrays.
// Absolute error stays below 1e-15 and tanh(0) is exactly 0.
Eigen::ArrayXXd tanh_of(const Eigen::ArrayXXd& z) { return 1.0 - 2.0 / ((2.0 * z).exp() + 1.0); }

constexpr Eigen::Index kBlockColumns = 1024;

}  // namespace

Eigen::Index NetworkShape::param_count() const {
  const Eigen::Index d = width;
  return (1 + inputs) * d + (hidden_layers - 1) * d * (1 + d) + (1 + d);
}

void NetworkShape::validate() const {
  if (inputs < 1 || hidden_layers < 1 || width < 1) {
    throw std::invalid_argument("network shape: inputs, hidden_layers and width must be >= 1");
  }
}

NetworkParams::NetworkParams(const NetworkShape& s) : shape(s), theta(Eigen::VectorXd::Zero(s.param_count())) {
  s.validate();
}

NetworkParams::NetworkParams(const NetworkShape& s, Eigen::VectorXd values) : shape(s), theta(std::move(values)) {
  s.validate();
  if (theta.size() != s.param_count()) {
    throw std::invalid_argument("network params: theta length does not match the shape");
  }
}

std::vector<Eigen::Index> layer_offsets(const NetworkShape& shape) {
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  int fan_in = shape.inputs;
  for (int l = 0; l <= shape.hidden_layers; ++l) {
    const int fan_out = l == shape.hidden_layers ? 1 : shape.width;
    offsets.push_back(offset);
    offset += static_cast<Eigen::Index>(fan_out) * (fan_in + 1);
    fan_in = fan_out;
  }
  return offsets;
}

std::vector<LayerView> layers(const NetworkParams& params) {
  const NetworkShape& shape = params.shape;
  std::vector<LayerView> views;
  views.reserve(shape.hidden_layers + 1);
  const double* data = params.theta.data();
  int fan_in = shape.inputs;
  for (int l = 0; l <= shape.hidden_layers; ++l) {
    const int fan_out = l == shape.hidden_layers ? 1 : shape.width;
    views.push_back(LayerView{Eigen::Map<const RowMajorMatrix>(data, fan_out, fan_in),
                              Eigen::Map<const Eigen::VectorXd>(data + fan_out * fan_in, fan_out)});
    data += static_cast<Eigen::Index>(fan_out) * (fan_in + 1);
    fan_in = fan_out;
  }
  return views;
}

NetworkParams init_params(const NetworkShape& shape, std::uint64_t seed) {
  NetworkParams params(shape);
  Xoshiro256pp rng(seed);
  const auto offsets = layer_offsets(shape);
  int fan_in = shape.inputs;
  for (int l = 0; l <= shape.hidden_layers; ++l) {
    const int fan_out = l == shape.hidden_layers ? 1 : shape.width;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(fan_out) * fan_in; ++k) {
      params.theta[offsets[l] + k] = uniform(rng);
    }
    fan_in = fan_out;
  }
  return params;
}

BatchEvaluation evaluate_batch(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  if (inputs.rows() != params.shape.inputs) {
    throw std::invalid_argument("network input has the wrong dimension");
  }
  const auto views = layers(params);
  const int hidden = params.shape.hidden_layers;
  const Eigen::Index batch = inputs.cols();

  BatchEvaluation out;
  out.activations.assign(hidden, Eigen::MatrixXd(params.shape.width, batch));
  out.values.resize(batch);
  out.input_grads.resize(params.shape.inputs, batch);
  const auto& output = views[hidden];
  Eigen::MatrixXd pre, upstream;
  for (Eigen::Index first = 0; first < batch; first += kBlockColumns) {
    const Eigen::Index cols = std::min(kBlockColumns, batch - first);
    for (int l = 0; l < hidden; ++l) {
      if (l == 0) {
        pre.noalias() = views[0].weights * inputs.middleCols(first, cols);
      } else {
        pre.noalias() = views[l].weights * out.activations[l - 1].middleCols(first, cols);
      }
      pre.colwise() += views[l].bias;
      out.activations[l].middleCols(first, cols) = tanh_of(pre.array()).matrix();
    }
    out.values.segment(first, cols).noalias() = output.weights * out.activations[hidden - 1].middleCols(first, cols);
    out.values.segment(first, cols).array() += output.bias[0];

    // Reverse pass for d value / d input.
    upstream = output.weights.transpose().replicate(1, cols);
    for (int l = hidden - 1; l >= 0; --l) {
      upstream.array() *= 1.0 - out.activations[l].middleCols(first, cols).array().square();
      if (l > 0) {
        pre.noalias() = views[l].weights.transpose() * upstream;
        upstream.swap(pre);
      } else {
        out.input_grads.middleCols(first, cols).noalias() = views[0].weights.transpose() * upstream;
      }
    }
  }
  return out;
}

double forward(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input) {
  return evaluate_batch(params, input).values[0];
}

Eigen::VectorXd input_grad(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input) {
  return evaluate_batch(params, input).input_grads.col(0);
}

Eigen::VectorXd second_order_param_grad(const NetworkParams& params,
                                        const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                        const BatchEvaluation& evaluation,
                                        const Eigen::Ref<const Eigen::RowVectorXd>& value_adjoint,
                                        const Eigen::Ref<const Eigen::MatrixXd>& grad_adjoint) {
  const auto views = layers(params);
  const auto offsets = layer_offsets(params.shape);
  const int hidden = params.shape.hidden_layers;
  const Eigen::Index batch = inputs.cols();
  const auto& acts = evaluation.activations;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.theta.size());
  const auto& output = views[hidden];
  grad[offsets[hidden] + params.shape.width] = value_adjoint.sum();

  std::vector<Eigen::MatrixXd> pre_tangent(hidden), tangent(hidden), slope(hidden);
  Eigen::MatrixXd act_adj, tangent_adj, pre_adj, pre_tangent_adj;

  // The gradient is a sum over columns, accumulated one column block at a time.
  for (Eigen::Index first = 0; first < batch; first += kBlockColumns) {
    const Eigen::Index cols = std::min(kBlockColumns, batch - first);
    const auto block_inputs = inputs.middleCols(first, cols);
    const auto block_grad_adjoint = grad_adjoint.middleCols(first, cols);
    const auto block_value_adjoint = value_adjoint.segment(first, cols);

    // Tangent pass along the gradient adjoints: tangent[l] = d a_l / d input . adjoint.
    for (int l = 0; l < hidden; ++l) {
      const auto a = acts[l].middleCols(first, cols).array();
      slope[l] = (1.0 - a.square()).matrix();
      if (l == 0) {
        pre_tangent[l].noalias() = views[0].weights * block_grad_adjoint;
      } else {
        pre_tangent[l].noalias() = views[l].weights * tangent[l - 1];
      }
      tangent[l] = (slope[l].array() * pre_tangent[l].array()).matrix();
    }

    // Output layer: phi = sum_k adj_k (w . a_k + b) + w . tangent_k.
    Eigen::Map<Eigen::VectorXd> out_grad(grad.data() + offsets[hidden], params.shape.width);
    out_grad.noalias() += acts[hidden - 1].middleCols(first, cols) * block_value_adjoint.transpose();
    out_grad += tangent[hidden - 1].rowwise().sum();
    act_adj.noalias() = output.weights.transpose() * block_value_adjoint;
    tangent_adj = output.weights.transpose().replicate(1, cols);

    for (int l = hidden - 1; l >= 0; --l) {
      const auto a = acts[l].middleCols(first, cols).array();
      // tangent = slope * pre_tangent, slope = 1 - a^2, a = tanh(pre)
      pre_tangent_adj = (slope[l].array() * tangent_adj.array()).matrix();
      act_adj.array() -= 2.0 * a * tangent_adj.array() * pre_tangent[l].array();
      pre_adj = (act_adj.array() * slope[l].array()).matrix();

      const Eigen::Index rows = views[l].weights.rows();
      const Eigen::Index fan_in = views[l].weights.cols();
      Eigen::Map<RowMajorMatrix> w_grad(grad.data() + offsets[l], rows, fan_in);
      if (l == 0) {
        w_grad.noalias() += pre_adj * block_inputs.transpose();
        w_grad.noalias() += pre_tangent_adj * block_grad_adjoint.transpose();
      } else {
        w_grad.noalias() += pre_adj * acts[l - 1].middleCols(first, cols).transpose();
        w_grad.noalias() += pre_tangent_adj * tangent[l - 1].transpose();
      }
      Eigen::Map<Eigen::VectorXd>(grad.data() + offsets[l] + rows * fan_in, rows) += pre_adj.rowwise().sum();

      if (l > 0) {
        act_adj.noalias() = views[l].weights.transpose() * pre_adj;
        tangent_adj.noalias() = views[l].weights.transpose() * pre_tangent_adj;
      }
    }
  }
  return grad;
}

}  // namespace dh
