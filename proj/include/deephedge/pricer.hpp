#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <memory>
#include <optional>
#include <string_view>

#include "deephedge/mlp.hpp"
#include "deephedge/payoffs.hpp"

namespace dh {

enum class Architecture { Unconstrained, ZeroTarget, ControlVariate, Constrained };

std::string_view to_string(Architecture arch);
/// Accepts unconstrained, zero_target, control_variate, constrained.
Architecture parse_architecture(std::string_view name);

struct BlendWeights {
  double baseline = 0.0;  // w(s, T)
  double network = 1.0;   // w'(s, T)
};

/// w, w' at elapsed time s of a horizon T:
/// Unconstrained (0, 1); ZeroTarget (s/T, 1); ControlVariate (1, 1); Constrained (s/T, 1 - s/T).
BlendWeights blend_weights(Architecture arch, double elapsed, double horizon);

/// Network input layouts. Time to maturity is fed as tau / horizon.
///   Vanilla:     (tau, x, c, K, P)
///   BarrierCall: (tau, x, c, K, R, B, P)
///   EquinoxFull: (tau, x, c, K, R, B, P, G)
enum class InputLayout { Vanilla, BarrierCall, EquinoxFull };

InputLayout input_layout(PayoffKind kind);
int input_count(InputLayout layout);

/// Indices of x and c in every layout.
inline constexpr int kSpotInput = 1;
inline constexpr int kCallInput = 2;

struct Hedge {
  double delta_x = 0.0;
  double delta_c = 0.0;
};

struct Quote {
  double price = 0.0;
  double delta_x = 0.0;
  double delta_c = 0.0;
};

/// Prices and hedges at the nodes of one path.
struct PathQuotes {
  Eigen::ArrayXd price;
  Eigen::ArrayXd delta_x;
  Eigen::ArrayXd delta_c;
};

/// Anything that prices and hedges along a path: PricedModel, compositions, test doubles.
template <class Q>
concept PathQuoter = requires(const Q& q, const Eigen::ArrayXd& a, const ContractTerms& terms) {
  { q.horizon() } -> std::convertible_to<double>;
  { q.quote_path(a, a, a, terms) } -> std::same_as<PathQuotes>;
};

/// Where a standard baseline came from, so the model can be serialized and rebuilt.
struct BaselineSource {
  double sigma_circ = 0.2;
  double r = 0.0;
  std::shared_ptr<const PricedModel> call_model;
};

/// Blend of a baseline f and a network N:
///   price(tau, z) = w(T - tau, T) f(tau, z) + w'(T - tau, T) N(tau / T, z, terms).
/// hedge() returns the exact partials of price in (x, c).
class PricedModel {
 public:
  PricedModel(Architecture arch, PayoffSpec payoff, BaselineFn baseline, NetworkParams net, double horizon,
              std::optional<BaselineSource> source = {});

  double price(double tau, double x, double c, const ContractTerms& terms) const;
  Hedge hedge(double tau, double x, double c, const ContractTerms& terms) const;
  Quote quote(double tau, double x, double c, const ContractTerms& terms) const;
  PathQuotes quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c,
                        const ContractTerms& terms) const;

  /// Network inputs for the given nodes, one column per node.
  Eigen::MatrixXd network_inputs(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c,
                                 const ContractTerms& terms) const;

  Architecture architecture() const { return arch_; }
  const PayoffSpec& payoff() const { return payoff_; }
  const BaselineFn& baseline() const { return baseline_; }
  const NetworkParams& network() const { return net_; }
  NetworkParams& network() { return net_; }
  double horizon() const { return horizon_; }
  InputLayout layout() const { return layout_; }
  const std::optional<BaselineSource>& baseline_source() const { return source_; }

  /// Throws std::invalid_argument when tau lies outside [0, horizon].
  void check_tau(double tau) const;

 private:
  Architecture arch_;
  PayoffSpec payoff_;
  BaselineFn baseline_;
  NetworkParams net_;
  double horizon_;
  InputLayout layout_;
  std::optional<BaselineSource> source_;
};

/// Model with the default baseline for the payoff (see default_baseline).
PricedModel make_priced_model(Architecture arch, const PayoffSpec& payoff, const ModelParams& market,
                              NetworkParams net, double horizon,
                              std::shared_ptr<const PricedModel> call_model = nullptr);

/// Default network shape for a payoff: layout input count, 3 x 32 hidden.
NetworkShape default_shape(PayoffKind kind, int hidden_layers = 3, int width = 32);

}  // namespace dh
