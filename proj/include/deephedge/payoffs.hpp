#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "deephedge/market_sim.hpp"

namespace dh {

class PricedModel;

enum class PayoffKind { Call, Square, Digital, EquinoxBarrierCall, EquinoxFull };

std::string_view to_string(PayoffKind kind);
/// Accepts call, square, digital, equinox_barrier_call, equinox_full.
PayoffKind parse_payoff_kind(std::string_view name);

/// Terminal payoff g. Call: (X_T - P)^+, Square: (X_T - P)^2, Digital: 1{X_T > P}.
/// Equinox, settled at T + R: 1{X_T <= B} (X_{T+R} - P)^+ + G 1{X_T > B}
/// (EquinoxBarrierCall is the G = 0 component).
struct PayoffSpec {
  PayoffKind kind = PayoffKind::Call;
  double strike = 1.0;
  std::optional<double> barrier;
  std::optional<double> cash;
  std::optional<double> second_period;

  bool is_equinox() const { return kind == PayoffKind::EquinoxBarrierCall || kind == PayoffKind::EquinoxFull; }
  /// Parameters must be present exactly for the declared kind.
  void validate() const;

  static PayoffSpec call(double strike) { return {PayoffKind::Call, strike, {}, {}, {}}; }
  static PayoffSpec square(double strike) { return {PayoffKind::Square, strike, {}, {}, {}}; }
  static PayoffSpec digital(double strike) { return {PayoffKind::Digital, strike, {}, {}, {}}; }
  static PayoffSpec equinox_barrier_call(double strike, double barrier, double second_period) {
    return {PayoffKind::EquinoxBarrierCall, strike, barrier, {}, second_period};
  }
  static PayoffSpec equinox_full(double strike, double barrier, double cash, double second_period) {
    return {PayoffKind::EquinoxFull, strike, barrier, cash, second_period};
  }

  friend bool operator==(const PayoffSpec&, const PayoffSpec&) = default;
};

/// Contract inputs attached to each path: the tradable call strike K and the
/// payoff parameters (P, B, R, G). Unused fields stay zero.
struct ContractTerms {
  double call_strike = 1.2;
  double strike = 1.0;
  double barrier = 0.0;
  double second_period = 0.0;
  double cash = 0.0;
};

ContractTerms terms_for(const PayoffSpec& spec, double call_strike);

/// x_T_plus_R must be supplied iff the kind is an Equinox kind.
double eval_payoff(const PayoffSpec& spec, double x_T, std::optional<double> x_T_plus_R = {});
/// Same, reading the payoff parameters from per-path terms.
double eval_payoff(PayoffKind kind, const ContractTerms& terms, double x_T, std::optional<double> x_T_plus_R = {});

struct BaselineValue {
  double value = 0.0;
  double d_x = 0.0;
  double d_c = 0.0;
};

/// Reference function f(tau, x, c, terms) with f(0, .) equal to the terminal
/// value, together with its partials in x and c.
class BaselineFn {
 public:
  using Eval = std::function<BaselineValue(double tau, double x, double c, const ContractTerms& terms)>;

  BaselineFn() = default;
  BaselineFn(std::string id, Eval eval) : id_(std::move(id)), eval_(std::move(eval)) {}

  BaselineValue operator()(double tau, double x, double c, const ContractTerms& terms) const {
    return eval_(tau, x, c, terms);
  }
  const std::string& id() const { return id_; }
  explicit operator bool() const { return static_cast<bool>(eval_); }

 private:
  std::string id_;
  Eval eval_;
};

/// Constant-volatility (sigma_circ) Black-Scholes price of the payoff for Call,
/// Square and Digital. For EquinoxBarrierCall:
///   f = h(tau, x, B) * CallModel(R + tau, x, c, K, P),
/// h the sigma_circ digital paying 1{X <= B}; EquinoxFull adds
/// G e^{-rR} times the sigma_circ digital paying 1{X > B}.
/// Equinox kinds require call_model (the trained vanilla call pricer, horizon >= T + R).
BaselineFn default_baseline(const PayoffSpec& spec, const ModelParams& model,
                            std::shared_ptr<const PricedModel> call_model = nullptr);

/// Terminal value the first-period pricer must match at the grid horizon:
/// the payoff for vanilla kinds; for Equinox kinds
///   1{x <= B} CallModel(R, x, c, K, P) + G e^{-rR} 1{x > B}.
double terminal_target(PayoffKind kind, const ContractTerms& terms, double x, double c, double r,
                       const PricedModel* call_model = nullptr);

}  // namespace dh
