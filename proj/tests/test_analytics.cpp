#include <doctest.h>

#include <cmath>
#include <random>

#include "deephedge/analytics.hpp"
#include "oracles.hpp"

using namespace dh;

TEST_CASE("norm_cdf reference points") {
  CHECK(norm_cdf(0.0) == 0.5);
  CHECK(norm_cdf(1.96) == doctest::Approx(oracle::phi_erf(1.96)).epsilon(1e-14));
  CHECK(norm_cdf(1.96) == doctest::Approx(0.9750).epsilon(1e-4));
  // Lower tail: erf-based 1 + erf(z) cancels, so compare to the erfc-free series value.
  CHECK(norm_cdf(-8.0) == doctest::Approx(6.220960574271785e-16).epsilon(1e-12));
  for (double z = -6.0; z <= 6.0; z += 0.25) {
    CHECK(std::abs(norm_cdf(z) - oracle::phi_erf(z)) <= 1e-12);
    CHECK(norm_cdf(-z) == doctest::Approx(1.0 - norm_cdf(z)).epsilon(1e-12));
  }
}

TEST_CASE("call price examples") {
  CHECK(bs_call_price({0.0, 1.3, 0.2, 0.0, 1.2}) == doctest::Approx(0.1).epsilon(1e-15));
  const double atm = bs_call_price({1.0, 1.0, 0.2, 0.0, 1.0});
  CHECK(std::abs(atm - oracle::call_by_quadrature(1.0, 1.0, 0.2, 0.0, 1.0)) < 1e-8);
  CHECK(atm == doctest::Approx(0.07966).epsilon(1e-4));
  CHECK(bs_call_price({1.0, 1.0, 0.2, 0.0, 1e-12}) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(bs_call_price({1.0, 1.0, 0.0, 0.0, 1.2}) == 0.0);
  CHECK(bs_call_price({1.0, 1.3, 0.0, 0.05, 1.2}) == doctest::Approx(1.3 - 1.2 * std::exp(-0.05)));
}

TEST_CASE("deltas and digital examples") {
  CHECK(bs_call_delta({1.0, 1.0, 0.2, 0.0, 1.0}) == doctest::Approx(oracle::phi_erf(0.1)).epsilon(1e-13));
  CHECK(bs_call_delta({1.0, 1.0, 0.2, 0.0, 1.0}) == doctest::Approx(0.5398).epsilon(1e-4));
  CHECK(bs_call_delta({1.0, 10.0, 0.2, 0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bs_call_delta({1.0, 0.01, 0.2, 0.0, 1.0}) < 1e-12);
  CHECK(bs_call_delta({0.0, 1.0, 0.2, 0.0, 1.0}) == 0.5);
  CHECK(bs_call_delta({0.0, 1.1, 0.2, 0.0, 1.0}) == 1.0);

  CHECK(bs_digital_price({1.0, 1.0, 0.2, 0.0, 1.0}) == doctest::Approx(oracle::phi_erf(-0.1)).epsilon(1e-13));
  CHECK(bs_digital_price({1.0, 1.0, 0.2, 0.0, 1.0}) == doctest::Approx(0.4602).epsilon(1e-4));
  CHECK(bs_digital_price({0.0, 1.5, 0.2, 0.0, 1.0}) == 1.0);
  CHECK(bs_digital_price({0.0, 0.5, 0.2, 0.0, 1.0}) == 0.0);
  CHECK(bs_digital_price({0.0, 1.0, 0.2, 0.0, 1.0}) == 0.0);  // strict inequality at the tie
  CHECK(bs_digital_below_price({0.0, 1.0, 0.2, 0.0, 1.0}) == 1.0);
}

TEST_CASE("square price examples") {
  CHECK(bs_square_price({0.0, 1.3, 0.2, 0.0, 1.0}) == doctest::Approx(0.09).epsilon(1e-14));
  const double v = bs_square_price({1.0, 1.0, 0.2, 0.0, 1.0});
  CHECK(v == doctest::Approx(std::exp(0.04) - 1.0).epsilon(1e-13));
  const auto mc = oracle::square_by_monte_carlo(1.0, 1.0, 0.2, 0.0, 1.0, 400000, 11);
  CHECK(std::abs(v - mc.mean) < 3.0 * mc.standard_error);
  for (double tau : {0.5, 1.0, 3.0}) {
    CHECK(bs_square_price({tau, 1.3, 0.0, 0.0, 1.0}) == doctest::Approx(0.09).epsilon(1e-13));
  }
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(bs_call_price({-1.0, 1.0, 0.2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bs_call_price({1.0, 0.0, 0.2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bs_call_price({1.0, 1.0, -0.2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bs_call_price({1.0, 1.0, 0.2, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(bs_digital_price({NAN, 1.0, 0.2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bs_square_price({1.0, INFINITY, 0.2, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("price bounds, delta consistency and digital monotonicity on random inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau_d(0.0, 3.0), x_d(0.2, 3.0), vol_d(0.0, 0.8), r_d(-0.02, 0.08),
      k_d(0.2, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const BsInputs in{tau_d(rng), x_d(rng), vol_d(rng), r_d(rng), k_d(rng)};
    const double price = bs_call_price(in);
    const double lower = std::max(in.x - in.strike * std::exp(-in.r * in.tau), 0.0);
    CHECK(price >= lower - 1e-14);
    CHECK(price <= in.x + 1e-14);
    const double delta = bs_call_delta(in);
    CHECK(delta >= 0.0);
    CHECK(delta <= 1.0);
    const double digital = bs_digital_price(in);
    CHECK(digital >= 0.0);
    CHECK(digital <= std::exp(-in.r * in.tau) + 1e-15);
    BsInputs higher = in;
    higher.strike *= 1.05;
    CHECK(bs_digital_price(higher) <= digital + 1e-15);
  }

  std::uniform_real_distribution<double> ratio_d(0.7, 1.4), tau_pos(0.1, 3.0), vol_pos(0.1, 0.5);
  for (int trial = 0; trial < 500; ++trial) {
    const double k = x_d(rng);
    const BsInputs in{tau_pos(rng), k * ratio_d(rng), vol_pos(rng), r_d(rng), k};
    const double h = 1e-5 * in.x;
    BsInputs up = in, down = in;
    up.x += h;
    down.x -= h;
    const double fd = (bs_call_price(up) - bs_call_price(down)) / (2.0 * h);
    CHECK(oracle::close(bs_call_delta(in), fd, 1e-6, 0.0));
    const double fd_digital = (bs_digital_price(up) - bs_digital_price(down)) / (2.0 * h);
    CHECK(oracle::close(bs_digital_delta(in), fd_digital, 1e-5, 1e-9));
    const double fd_square = (bs_square_price(up) - bs_square_price(down)) / (2.0 * h);
    CHECK(oracle::close(bs_square_delta(in), fd_square, 1e-6, 1e-10));
  }
}
