#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "deephedge/evaluation.hpp"
#include "deephedge/pricer.hpp"

namespace dh {

enum class EquinoxMode { TwoNets, Single };

std::string_view to_string(EquinoxMode mode);
/// Accepts two_nets, single.
EquinoxMode parse_equinox_mode(std::string_view name);

/// Discount applied to the digital leg of the two-network price:
/// SecondPeriod uses e^{-rR}; Literal uses e^{-r(R + T - t)}. Equal at r = 0.
enum class EquinoxDiscount { SecondPeriod, Literal };

std::string_view to_string(EquinoxDiscount discount);
EquinoxDiscount parse_equinox_discount(std::string_view name);

/// Equinox price over the first period [0, T]:
///   TwoNets: N1(tau, .) + G d(tau) N2(tau, .) with N1 the barrier-call model
///            and N2 the digital model paying 1{X_T > B};
///   Single:  the one model over (tau, x, c, K, R, B, P, G).
/// The call model hedges the second period when X_T <= B.
struct EquinoxComposition {
  EquinoxMode mode = EquinoxMode::TwoNets;
  EquinoxDiscount discount = EquinoxDiscount::SecondPeriod;
  std::shared_ptr<const PricedModel> call;
  std::shared_ptr<const PricedModel> barrier_call;
  std::shared_ptr<const PricedModel> digital;
  std::shared_ptr<const PricedModel> single;
  double r = 0.0;

  /// First-period horizon T.
  double horizon() const;
  double second_period() const;
  void validate() const;

  PathQuotes quote_path(const Eigen::ArrayXd& tau, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c,
                        const ContractTerms& terms) const;
};

double equinox_price(const EquinoxComposition& comp, double t, double x, double c, const ContractTerms& terms);
Hedge equinox_hedge(const EquinoxComposition& comp, double t, double x, double c, const ContractTerms& terms);

/// Grid over [0, T + R] with the first-period step size; T must fall on a node.
TimeGrid equinox_full_grid(const TimeGrid& first_period, double second_period);

/// P&L of path i of a PathSet spanning [0, T + R] (tradable call maturing at T + R):
/// composition hedges on [0, T]; if X_T <= B the call model hedges on [T, T + R]
/// and the payoff (X_{T+R} - P)^+ settles at T + R, otherwise G accrues to T + R.
double equinox_pnl(const EquinoxComposition& comp, const PathSet& paths, Eigen::Index i,
                   const ContractTerms& terms);

/// P&L report on fresh paths. setup.grid is the first-period grid and
/// setup.payoff the Equinox payoff; normalization is the reference price.
PnLReport evaluate_equinox(const EquinoxComposition& comp, const EvalSetup& setup, double normalization,
                           std::string label = {});

/// Descriptor: mode, discount, rate and checkpoint file names (relative to the
/// descriptor's directory).
struct EquinoxDescriptor {
  EquinoxMode mode = EquinoxMode::TwoNets;
  EquinoxDiscount discount = EquinoxDiscount::SecondPeriod;
  double r = 0.0;
  std::string call;
  std::string barrier_call;
  std::string digital;
  std::string single;
};

void save_equinox_descriptor(const std::filesystem::path& file, const EquinoxDescriptor& descriptor);
EquinoxDescriptor load_equinox_descriptor(const std::filesystem::path& file);
/// Loads the referenced checkpoints.
EquinoxComposition load_equinox_composition(const std::filesystem::path& descriptor_file);

}  // namespace dh
