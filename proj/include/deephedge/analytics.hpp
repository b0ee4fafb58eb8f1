#pragma once

// Closed-form Black-Scholes quantities. All prices are for a unit notional and
// use continuous compounding at rate r; no dividends.

namespace dh {

struct BsInputs {
  double tau = 0.0;     // time to maturity in years
  double x = 1.0;       // spot
  double sigma = 0.0;   // volatility
  double r = 0.0;       // risk-free rate
  double strike = 1.0;  // K or P
};

/// Throws std::invalid_argument on non-finite inputs or tau < 0, x <= 0,
/// strike <= 0, sigma < 0.
void validate(const BsInputs& in);

/// Standard normal CDF, evaluated as erfc(-z/sqrt(2))/2. Max absolute error is
/// that of erfc, a few ulp; the lower tail keeps full relative precision.
double norm_cdf(double z);
double norm_pdf(double z);

/// d1 = [log(x/K) + (r + sigma^2/2) tau] / (sigma sqrt(tau)). Requires sigma*sqrt(tau) > 0.
double bs_d1(const BsInputs& in);

/// Call price. When sigma*sqrt(tau) == 0 returns max(x - K e^{-r tau}, 0).
double bs_call_price(const BsInputs& in);

/// Phi(d1). In the deterministic limit: 1 if x > K e^{-r tau}, 0 if below, 0.5 on a tie.
double bs_call_delta(const BsInputs& in);

/// Cash-or-nothing digital paying 1{X_T > K}: e^{-r tau} Phi(d2).
/// In the deterministic limit returns e^{-r tau} 1{x e^{r tau} > K}, strict inequality.
double bs_digital_price(const BsInputs& in);
double bs_digital_delta(const BsInputs& in);

/// Complementary digital paying 1{X_T <= K}: e^{-r tau} Phi(-d2).
double bs_digital_below_price(const BsInputs& in);
double bs_digital_below_delta(const BsInputs& in);

/// Price of (X_T - K)^2 under the lognormal law:
/// e^{-r tau} (x^2 e^{(2r + sigma^2) tau} - 2 K x e^{r tau} + K^2).
double bs_square_price(const BsInputs& in);
double bs_square_delta(const BsInputs& in);

}  // namespace dh
