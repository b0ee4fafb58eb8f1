#include "deephedge/equinox.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "deephedge/checkpoint.hpp"
#include "deephedge/errors.hpp"

namespace dh {

std::string_view to_string(EquinoxMode mode) { return mode == EquinoxMode::TwoNets ? "two_nets" : "single"; }

EquinoxMode parse_equinox_mode(std::string_view name) {
  if (name == "two_nets") return EquinoxMode::TwoNets;
  if (name == "single") return EquinoxMode::Single;
  throw std::invalid_argument("unknown Equinox mode '" + std::string(name) + "'");
}

std::string_view to_string(EquinoxDiscount discount) {
  return discount == EquinoxDiscount::SecondPeriod ? "second_period" : "literal";
}

EquinoxDiscount parse_equinox_discount(std::string_view name) {
  if (name == "second_period") return EquinoxDiscount::SecondPeriod;
  if (name == "literal") return EquinoxDiscount::Literal;
  throw std::invalid_argument("unknown Equinox discount convention '" + std::string(name) + "'");
}

double EquinoxComposition::horizon() const {
  return mode == EquinoxMode::TwoNets ? barrier_call->horizon() : single->horizon();
}

double EquinoxComposition::second_period() const {
  const PricedModel& m = mode == EquinoxMode::TwoNets ? *barrier_call : *single;
  return *m.payoff().second_period;
}

void EquinoxComposition::validate() const {
  if (!call) throw std::invalid_argument("Equinox composition: call model missing");
  if (mode == EquinoxMode::TwoNets) {
    if (!barrier_call || !digital) throw std::invalid_argument("Equinox composition: two_nets needs barrier-call and digital models");
    if (barrier_call->payoff().kind != PayoffKind::EquinoxBarrierCall || digital->payoff().kind != PayoffKind::Digital) {
      throw std::invalid_argument("Equinox composition: model payoffs do not match their roles");
    }
    if (std::abs(barrier_call->horizon() - digital->horizon()) > 1e-12) {
      throw std::invalid_argument("Equinox composition: first-period horizons differ");
    }
  } else {
    if (!single) throw std::invalid_argument("Equinox composition: single mode needs the Equinox model");
    if (single->payoff().kind != PayoffKind::EquinoxFull) {
      throw std::invalid_argument("Equinox composition: single model must price equinox_full");
    }
  }
  if (call->horizon() + 1e-12 < horizon() + second_period()) {
    throw std::invalid_argument("Equinox composition: call model horizon shorter than T + R");
  }
}

PathQuotes EquinoxComposition::quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x,
                                          const Eigen::ArrayXd& c, const ContractTerms& terms) const {
  if (mode == EquinoxMode::Single) return single->quote_path(tau, x, c, terms);
  PathQuotes out = barrier_call->quote_path(tau, x, c, terms);
  if (terms.cash == 0.0) return out;
  const ContractTerms digital_terms{terms.call_strike, terms.barrier, 0.0, 0.0, 0.0};
  const PathQuotes d = digital->quote_path(tau, x, c, digital_terms);
  Eigen::ArrayXd weight = Eigen::ArrayXd::Constant(tau.size(), terms.cash * std::exp(-r * terms.second_period));
  if (discount == EquinoxDiscount::Literal) weight = terms.cash * (-r * (terms.second_period + tau)).exp();
  out.price += weight * d.price;
  out.delta_x += weight * d.delta_x;
  out.delta_c += weight * d.delta_c;
  return out;
}

double equinox_price(const EquinoxComposition& comp, double t, double x, double c, const ContractTerms& terms) {
  const auto one = [](double v) { return Eigen::ArrayXd::Constant(1, v); };
  return comp.quote_path(one(comp.horizon() - t), one(x), one(c), terms).price[0];
}

Hedge equinox_hedge(const EquinoxComposition& comp, double t, double x, double c, const ContractTerms& terms) {
  const auto one = [](double v) { return Eigen::ArrayXd::Constant(1, v); };
  const PathQuotes q = comp.quote_path(one(comp.horizon() - t), one(x), one(c), terms);
  return {q.delta_x[0], q.delta_c[0]};
}

TimeGrid equinox_full_grid(const TimeGrid& first_period, double second_period) {
  const double steps = first_period.steps * (first_period.t_end + second_period) / first_period.t_end;
  const long rounded = std::lround(steps);
  if (std::abs(steps - static_cast<double>(rounded)) > 1e-9) {
    throw std::invalid_argument("Equinox grid: R must be a whole number of first-period steps");
  }
  return TimeGrid{first_period.t_end + second_period, static_cast<int>(rounded)};
}

double equinox_pnl(const EquinoxComposition& comp, const PathSet& paths, Eigen::Index i,
                   const ContractTerms& terms) {
  const TimeGrid& grid = paths.grid;
  const double T = comp.horizon();
  const double r = paths.params.r;
  const int total = grid.steps;
  const int m1 = static_cast<int>(std::lround(T / grid.dt()));
  if (std::abs(grid.node(m1) - T) > 1e-9 || std::abs(grid.t_end - T - terms.second_period) > 1e-9) {
    throw std::invalid_argument("equinox_pnl: path grid must span [0, T + R] with T on a node");
  }
  const auto x = paths.x.col(i);
  const auto c = paths.c.col(i);

  Eigen::ArrayXd tau(m1), xs(m1), cs(m1);
  for (int j = 0; j < m1; ++j) {
    tau[j] = T - grid.node(j);
    xs[j] = x[j];
    cs[j] = c[j];
  }
  const PathQuotes first = comp.quote_path(tau, xs, cs, terms);
  double pnl = first.price[0];
  for (int j = 0; j < m1; ++j) {
    pnl += (first.delta_x[j] * (x[j + 1] - x[j]) + first.delta_c[j] * (c[j + 1] - c[j])) *
           std::exp(-r * grid.node(j + 1));
  }

  const bool below = x[m1] <= terms.barrier;
  double payoff = terms.cash;
  if (below) {
    const int n2 = total - m1;
    Eigen::ArrayXd tau2(n2), x2(n2), c2(n2);
    for (int q = 0; q < n2; ++q) {
      tau2[q] = grid.t_end - grid.node(m1 + q);
      x2[q] = x[m1 + q];
      c2[q] = c[m1 + q];
    }
    const ContractTerms call_terms{terms.call_strike, terms.strike, 0.0, 0.0, 0.0};
    const PathQuotes second = comp.call->quote_path(tau2, x2, c2, call_terms);
    for (int q = 0; q < n2; ++q) {
      const int j = m1 + q;
      pnl += (second.delta_x[q] * (x[j + 1] - x[j]) + second.delta_c[q] * (c[j + 1] - c[j])) *
             std::exp(-r * grid.node(j + 1));
    }
    payoff = std::max(x[total] - terms.strike, 0.0);
  }
  return pnl - payoff * std::exp(-r * grid.t_end);
}

PnLReport evaluate_equinox(const EquinoxComposition& comp, const EvalSetup& setup, double normalization,
                           std::string label) {
  comp.validate();
  if (!setup.payoff.is_equinox()) throw std::invalid_argument("evaluate_equinox: Equinox payoff expected");
  if (std::abs(setup.grid.t_end - comp.horizon()) > 1e-12) {
    throw std::invalid_argument("evaluate_equinox: first-period grid differs from the model horizon");
  }
  EvalSetup full = setup;
  full.grid = equinox_full_grid(setup.grid, *setup.payoff.second_period);
  const ContractTerms terms = setup.terms();
  Eigen::VectorXd samples(setup.n_paths);
  Eigen::Index first = 0;
  for_each_path_block(full, [&](const PathSet& paths) {
    for (Eigen::Index i = 0; i < paths.size(); ++i) samples[first + i] = equinox_pnl(comp, paths, i, terms);
    first += paths.size();
  });
  return pnl_stats(std::move(samples), normalization, std::move(label));
}

void save_equinox_descriptor(const std::filesystem::path& file, const EquinoxDescriptor& d) {
  nlohmann::json j{{"mode", std::string(to_string(d.mode))},
                   {"discount", std::string(to_string(d.discount))},
                   {"r", d.r},
                   {"call", d.call}};
  if (d.mode == EquinoxMode::TwoNets) {
    j["barrier_call"] = d.barrier_call;
    j["digital"] = d.digital;
  } else {
    j["single"] = d.single;
  }
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(1) << '\n';
}

EquinoxDescriptor load_equinox_descriptor(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("Equinox descriptor " + file.string() + " not found");
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    EquinoxDescriptor d;
    d.mode = parse_equinox_mode(j.at("mode").get<std::string>());
    d.discount = parse_equinox_discount(j.at("discount").get<std::string>());
    d.r = j.at("r").get<double>();
    d.call = j.at("call").get<std::string>();
    if (d.mode == EquinoxMode::TwoNets) {
      d.barrier_call = j.at("barrier_call").get<std::string>();
      d.digital = j.at("digital").get<std::string>();
    } else {
      d.single = j.at("single").get<std::string>();
    }
    return d;
  } catch (const std::exception& e) {
    throw ConfigError("Equinox descriptor " + file.string() + ": " + e.what());
  }
}

EquinoxComposition load_equinox_composition(const std::filesystem::path& descriptor_file) {
  const EquinoxDescriptor d = load_equinox_descriptor(descriptor_file);
  const std::filesystem::path dir = descriptor_file.parent_path();
  EquinoxComposition comp;
  comp.mode = d.mode;
  comp.discount = d.discount;
  comp.r = d.r;
  comp.call = load_checkpoint(dir / d.call).model;
  if (d.mode == EquinoxMode::TwoNets) {
    comp.barrier_call = load_checkpoint(dir / d.barrier_call).model;
    comp.digital = load_checkpoint(dir / d.digital).model;
  } else {
    comp.single = load_checkpoint(dir / d.single).model;
  }
  comp.validate();
  return comp;
}

}  // namespace dh
