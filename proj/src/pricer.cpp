#include "deephedge/pricer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dh {

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::Unconstrained: return "unconstrained";
    case Architecture::ZeroTarget: return "zero_target";
    case Architecture::ControlVariate: return "control_variate";
    case Architecture::Constrained: return "constrained";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  for (Architecture arch : {Architecture::Unconstrained, Architecture::ZeroTarget, Architecture::ControlVariate,
                            Architecture::Constrained}) {
    if (to_string(arch) == name) return arch;
  }
  throw std::invalid_argument("unknown architecture variant '" + std::string(name) + "'");
}

BlendWeights blend_weights(Architecture arch, double elapsed, double horizon) {
  const double fraction = elapsed / horizon;
  switch (arch) {
    case Architecture::Unconstrained: return {0.0, 1.0};
    case Architecture::ZeroTarget: return {fraction, 1.0};
    case Architecture::ControlVariate: return {1.0, 1.0};
    case Architecture::Constrained: return {fraction, 1.0 - fraction};
  }
  return {0.0, 1.0};
}

InputLayout input_layout(PayoffKind kind) {
  switch (kind) {
    case PayoffKind::EquinoxBarrierCall: return InputLayout::BarrierCall;
    case PayoffKind::EquinoxFull: return InputLayout::EquinoxFull;
    default: return InputLayout::Vanilla;
  }
}

int input_count(InputLayout layout) {
  switch (layout) {
    case InputLayout::Vanilla: return 5;
    case InputLayout::BarrierCall: return 7;
    case InputLayout::EquinoxFull: return 8;
  }
  return 5;
}

NetworkShape default_shape(PayoffKind kind, int hidden_layers, int width) {
  return NetworkShape{input_count(input_layout(kind)), hidden_layers, width};
}

PricedModel::PricedModel(Architecture arch, PayoffSpec payoff, BaselineFn baseline, NetworkParams net, double horizon,
                         std::optional<BaselineSource> source)
    : arch_(arch),
      payoff_(std::move(payoff)),
      baseline_(std::move(baseline)),
      net_(std::move(net)),
      horizon_(horizon),
      layout_(input_layout(payoff_.kind)),
      source_(std::move(source)) {
  if (!(std::isfinite(horizon_) && horizon_ > 0.0)) throw std::invalid_argument("priced model: horizon must be > 0");
  if (net_.shape.inputs != input_count(layout_)) {
    throw std::invalid_argument("priced model: network input count does not match the payoff layout");
  }
  if (arch_ != Architecture::Unconstrained && !baseline_) {
    throw std::invalid_argument("priced model: architecture needs a baseline function");
  }
}

void PricedModel::check_tau(double tau) const {
  if (!(tau >= 0.0 && tau <= horizon_)) {
    throw std::invalid_argument("time to maturity " + std::to_string(tau) + " outside [0, " +
                                std::to_string(horizon_) + "]");
  }
}

Eigen::MatrixXd PricedModel::network_inputs(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x,
                                            const Eigen::ArrayXd& c, const ContractTerms& terms) const {
  const Eigen::Index n = tau.size();
  Eigen::MatrixXd inputs(input_count(layout_), n);
  inputs.row(0) = (tau / horizon_).matrix().transpose();
  inputs.row(kSpotInput) = x.matrix().transpose();
  inputs.row(kCallInput) = c.matrix().transpose();
  inputs.row(3).setConstant(terms.call_strike);
  switch (layout_) {
    case InputLayout::Vanilla: inputs.row(4).setConstant(terms.strike); break;
    case InputLayout::EquinoxFull: inputs.row(7).setConstant(terms.cash); [[fallthrough]];
    case InputLayout::BarrierCall:
      inputs.row(4).setConstant(terms.second_period);
      inputs.row(5).setConstant(terms.barrier);
      inputs.row(6).setConstant(terms.strike);
      break;
  }
  return inputs;
}

PathQuotes PricedModel::quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c,
                                   const ContractTerms& terms) const {
  const Eigen::Index n = tau.size();
  if (x.size() != n || c.size() != n) throw std::invalid_argument("quote_path: node arrays differ in length");
  for (Eigen::Index k = 0; k < n; ++k) check_tau(tau[k]);

  const BatchEvaluation eval = evaluate_batch(net_, network_inputs(tau, x, c, terms));
  PathQuotes out{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const BlendWeights w = blend_weights(arch_, horizon_ - tau[k], horizon_);
    out.price[k] = w.network * eval.values[k];
    out.delta_x[k] = w.network * eval.input_grads(kSpotInput, k);
    out.delta_c[k] = w.network * eval.input_grads(kCallInput, k);
    if (w.baseline != 0.0) {
      const BaselineValue f = baseline_(tau[k], x[k], c[k], terms);
      out.price[k] = w.baseline * f.value + out.price[k];
      out.delta_x[k] = w.baseline * f.d_x + out.delta_x[k];
      out.delta_c[k] = w.baseline * f.d_c + out.delta_c[k];
    }
  }
  return out;
}

Quote PricedModel::quote(double tau, double x, double c, const ContractTerms& terms) const {
  const PathQuotes q = quote_path(Eigen::ArrayXd::Constant(1, tau), Eigen::ArrayXd::Constant(1, x),
                                  Eigen::ArrayXd::Constant(1, c), terms);
  return Quote{q.price[0], q.delta_x[0], q.delta_c[0]};
}

double PricedModel::price(double tau, double x, double c, const ContractTerms& terms) const {
  return quote(tau, x, c, terms).price;
}

Hedge PricedModel::hedge(double tau, double x, double c, const ContractTerms& terms) const {
  const Quote q = quote(tau, x, c, terms);
  return Hedge{q.delta_x, q.delta_c};
}

PricedModel make_priced_model(Architecture arch, const PayoffSpec& payoff, const ModelParams& market,
                              NetworkParams net, double horizon, std::shared_ptr<const PricedModel> call_model) {
  BaselineFn baseline = default_baseline(payoff, market, call_model);
  return PricedModel(arch, payoff, std::move(baseline), std::move(net), horizon,
                     BaselineSource{market.sigma_circ, market.r, std::move(call_model)});
}

}  // namespace dh
