#include "deephedge/payoffs.hpp"

#include "deephedge/analytics.hpp"
#include "deephedge/pricer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dh {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

bool positive(const std::optional<double>& v) { return v.has_value() && std::isfinite(*v) && *v > 0.0; }

}  // namespace

std::string_view to_string(PayoffKind kind) {
  switch (kind) {
    case PayoffKind::Call: return "call";
    case PayoffKind::Square: return "square";
    case PayoffKind::Digital: return "digital";
    case PayoffKind::EquinoxBarrierCall: return "equinox_barrier_call";
    case PayoffKind::EquinoxFull: return "equinox_full";
  }
  return "unknown";
}

PayoffKind parse_payoff_kind(std::string_view name) {
  for (PayoffKind kind : {PayoffKind::Call, PayoffKind::Square, PayoffKind::Digital, PayoffKind::EquinoxBarrierCall,
                          PayoffKind::EquinoxFull}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown payoff kind '" + std::string(name) + "'");
}

void PayoffSpec::validate() const {
  require(std::isfinite(strike) && strike > 0.0, "payoff: strike must be > 0");
  if (!is_equinox()) {
    require(!barrier && !cash && !second_period,
            "payoff: barrier, cash and second_period apply to Equinox kinds only");
    return;
  }
  require(positive(barrier), "payoff: Equinox kinds need a barrier > 0");
  require(positive(second_period), "payoff: Equinox kinds need a second_period > 0");
  if (kind == PayoffKind::EquinoxFull) {
    require(cash.has_value() && std::isfinite(*cash) && *cash >= 0.0, "payoff: equinox_full needs cash >= 0");
  } else {
    require(!cash, "payoff: equinox_barrier_call takes no cash amount");
  }
}

ContractTerms terms_for(const PayoffSpec& spec, double call_strike) {
  ContractTerms terms;
  terms.call_strike = call_strike;
  terms.strike = spec.strike;
  terms.barrier = spec.barrier.value_or(0.0);
  terms.second_period = spec.second_period.value_or(0.0);
  terms.cash = spec.cash.value_or(0.0);
  return terms;
}

double eval_payoff(const PayoffSpec& spec, double x_T, std::optional<double> x_T_plus_R) {
  spec.validate();
  return eval_payoff(spec.kind, terms_for(spec, 1.0), x_T, x_T_plus_R);
}

double eval_payoff(PayoffKind kind, const ContractTerms& terms, double x_T, std::optional<double> x_T_plus_R) {
  const bool equinox = kind == PayoffKind::EquinoxBarrierCall || kind == PayoffKind::EquinoxFull;
  if (equinox && !x_T_plus_R) throw std::invalid_argument("Equinox payoff needs the level at T + R");
  if (!equinox && x_T_plus_R) throw std::invalid_argument("second-period level given for a single-period payoff");
  switch (kind) {
    case PayoffKind::Call: return std::max(x_T - terms.strike, 0.0);
    case PayoffKind::Square: {
      const double gap = x_T - terms.strike;
      return gap * gap;
    }
    case PayoffKind::Digital: return x_T > terms.strike ? 1.0 : 0.0;
    case PayoffKind::EquinoxBarrierCall:
      return x_T <= terms.barrier ? std::max(*x_T_plus_R - terms.strike, 0.0) : 0.0;
    case PayoffKind::EquinoxFull:
      return x_T <= terms.barrier ? std::max(*x_T_plus_R - terms.strike, 0.0) : terms.cash;
  }
  return 0.0;
}

BaselineFn default_baseline(const PayoffSpec& spec, const ModelParams& model,
                            std::shared_ptr<const PricedModel> call_model) {
  spec.validate();
  const double vol = model.sigma_circ;
  const double r = model.r;
  switch (spec.kind) {
    case PayoffKind::Call:
      return BaselineFn("bs_call", [vol, r](double tau, double x, double, const ContractTerms& t) {
        const BsInputs in{tau, x, vol, r, t.strike};
        return BaselineValue{bs_call_price(in), bs_call_delta(in), 0.0};
      });
    case PayoffKind::Square:
      return BaselineFn("bs_square", [vol, r](double tau, double x, double, const ContractTerms& t) {
        const BsInputs in{tau, x, vol, r, t.strike};
        return BaselineValue{bs_square_price(in), bs_square_delta(in), 0.0};
      });
    case PayoffKind::Digital:
      return BaselineFn("bs_digital", [vol, r](double tau, double x, double, const ContractTerms& t) {
        const BsInputs in{tau, x, vol, r, t.strike};
        return BaselineValue{bs_digital_price(in), bs_digital_delta(in), 0.0};
      });
    case PayoffKind::EquinoxBarrierCall:
    case PayoffKind::EquinoxFull: break;
  }
  if (!call_model) throw std::invalid_argument("Equinox baseline needs a trained call model");
  const bool with_cash = spec.kind == PayoffKind::EquinoxFull;
  return BaselineFn(with_cash ? "equinox_full" : "equinox_barrier_call",
                    [vol, r, with_cash, call_model](double tau, double x, double c, const ContractTerms& t) {
                      const BsInputs barrier{tau, x, vol, r, t.barrier};
                      const double h = bs_digital_below_price(barrier);
                      const double h_x = bs_digital_below_delta(barrier);
                      const ContractTerms call_terms{t.call_strike, t.strike, 0.0, 0.0, 0.0};
                      const Quote q = call_model->quote(t.second_period + tau, x, c, call_terms);
                      BaselineValue out{h * q.price, h_x * q.price + h * q.delta_x, h * q.delta_c};
                      if (with_cash) {
                        const double weight = t.cash * std::exp(-r * t.second_period);
                        out.value += weight * bs_digital_price(barrier);
                        out.d_x += weight * bs_digital_delta(barrier);
                      }
                      return out;
                    });
}

double terminal_target(PayoffKind kind, const ContractTerms& terms, double x, double c, double r,
                       const PricedModel* call_model) {
  if (kind != PayoffKind::EquinoxBarrierCall && kind != PayoffKind::EquinoxFull) {
    return eval_payoff(kind, terms, x);
  }
  if (call_model == nullptr) throw std::invalid_argument("Equinox terminal value needs a trained call model");
  const bool below = x <= terms.barrier;
  const ContractTerms call_terms{terms.call_strike, terms.strike, 0.0, 0.0, 0.0};
  double value = below ? call_model->price(terms.second_period, x, c, call_terms) : 0.0;
  if (kind == PayoffKind::EquinoxFull && !below) value += terms.cash * std::exp(-r * terms.second_period);
  return value;
}

}  // namespace dh
