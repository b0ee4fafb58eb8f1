#include "deephedge/analytics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dh {

namespace {

bool deterministic(const BsInputs& in) { return in.tau == 0.0 || in.sigma == 0.0; }

double total_vol(const BsInputs& in) { return in.sigma * std::sqrt(in.tau); }

}  // namespace

void validate(const BsInputs& in) {
  if (!std::isfinite(in.tau) || !std::isfinite(in.x) || !std::isfinite(in.sigma) ||
      !std::isfinite(in.r) || !std::isfinite(in.strike)) {
    throw std::invalid_argument("Black-Scholes inputs must be finite");
  }
  if (in.tau < 0.0) throw std::invalid_argument("Black-Scholes: tau must be >= 0");
  if (in.x <= 0.0) throw std::invalid_argument("Black-Scholes: spot must be > 0");
  if (in.strike <= 0.0) throw std::invalid_argument("Black-Scholes: strike must be > 0");
  if (in.sigma < 0.0) throw std::invalid_argument("Black-Scholes: sigma must be >= 0");
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double bs_d1(const BsInputs& in) {
  const double v = total_vol(in);
  return (std::log(in.x / in.strike) + (in.r + 0.5 * in.sigma * in.sigma) * in.tau) / v;
}

double bs_call_price(const BsInputs& in) {
  validate(in);
  if (in.tau == 0.0) return std::max(in.x - in.strike, 0.0);
  const double discounted_strike = in.strike * std::exp(-in.r * in.tau);
  if (in.sigma == 0.0) return std::max(in.x - discounted_strike, 0.0);
  const double d1 = bs_d1(in);
  const double d2 = d1 - total_vol(in);
  return in.x * norm_cdf(d1) - discounted_strike * norm_cdf(d2);
}

double bs_call_delta(const BsInputs& in) {
  validate(in);
  if (deterministic(in)) {
    const double forward_gap = in.x - in.strike * std::exp(-in.r * in.tau);
    if (forward_gap > 0.0) return 1.0;
    if (forward_gap < 0.0) return 0.0;
    return 0.5;
  }
  return norm_cdf(bs_d1(in));
}

double bs_digital_price(const BsInputs& in) {
  validate(in);
  if (in.tau == 0.0) return in.x > in.strike ? 1.0 : 0.0;
  const double discount = std::exp(-in.r * in.tau);
  if (in.sigma == 0.0) return in.x * std::exp(in.r * in.tau) > in.strike ? discount : 0.0;
  return discount * norm_cdf(bs_d1(in) - total_vol(in));
}

double bs_digital_delta(const BsInputs& in) {
  validate(in);
  if (deterministic(in)) return 0.0;
  const double v = total_vol(in);
  return std::exp(-in.r * in.tau) * norm_pdf(bs_d1(in) - v) / (in.x * v);
}

double bs_digital_below_price(const BsInputs& in) {
  validate(in);
  if (in.tau == 0.0) return in.x <= in.strike ? 1.0 : 0.0;
  const double discount = std::exp(-in.r * in.tau);
  if (in.sigma == 0.0) return in.x * std::exp(in.r * in.tau) <= in.strike ? discount : 0.0;
  return discount * norm_cdf(total_vol(in) - bs_d1(in));
}

double bs_digital_below_delta(const BsInputs& in) { return -bs_digital_delta(in); }

double bs_square_price(const BsInputs& in) {
  validate(in);
  if (in.tau == 0.0) {
    const double gap = in.x - in.strike;
    return gap * gap;
  }
  const double growth = std::exp(in.r * in.tau);
  const double second_moment = in.x * in.x * std::exp((2.0 * in.r + in.sigma * in.sigma) * in.tau);
  return (second_moment - 2.0 * in.strike * in.x * growth + in.strike * in.strike) / growth;
}

double bs_square_delta(const BsInputs& in) {
  validate(in);
  if (in.tau == 0.0) return 2.0 * (in.x - in.strike);
  const double growth = std::exp(in.r * in.tau);
  return (2.0 * in.x * std::exp((2.0 * in.r + in.sigma * in.sigma) * in.tau) - 2.0 * in.strike * growth) /
         growth;
}

}  // namespace dh
