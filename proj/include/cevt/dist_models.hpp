#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cevt/random.hpp"

namespace cevt {

enum class Family { Exponential, Weibull, LogNormal, NormalTail };

std::string_view family_name(Family family);

/// A von Mises lifetime or censoring distribution with closed-form tail.
///
/// Parameterisations:
///   Exponential(rate l):        tail(x) = exp(-l x)
///   Weibull(shape a, scale l):  tail(x) = exp(-l x^a)      (l multiplies x^a)
///   LogNormal(sigma s):         tail(x) = phi_bar(log(x) / s)
///   NormalTail(sigma s):        tail(x) = phi_bar(x / s),  support is the real line
///
/// `x0` is the left end of the interval on which the von Mises representation is used;
/// the auxiliary (reciprocal hazard) function is only evaluated to the right of it.
/// Values are immutable and safe to share between threads.
class DistributionModel {
 public:
  static DistributionModel exponential(double rate);
  static DistributionModel weibull(double shape, double scale);
  static DistributionModel lognormal(double sigma);
  static DistributionModel normal_tail(double sigma);

  /// Parses `exp(rate=1)`, `weibull(shape=2,scale=1)`, `lognormal(sigma=1)` or
  /// `normaltail(sigma=1)`. Throws UsageError naming the offending token.
  static DistributionModel parse(std::string_view text);

  Family family() const { return family_; }
  /// Rate for Exponential, shape for Weibull, sigma for LogNormal and NormalTail.
  double first_parameter() const { return p1_; }
  /// Weibull scale; 0 for the one-parameter families.
  double second_parameter() const { return p2_; }
  double x0() const { return x0_; }
  /// Left end of the support: 0, or -inf for NormalTail.
  double support_lower() const;

  double tail(double x) const;
  double log_tail(double x) const;
  double density(double x) const;
  double hazard(double x) const;
  double auxiliary(double x) const;
  /// x with tail(x) = q, for q in [0, 1].
  double inverse_tail(double q) const;
  double sample(RandomStream& rng) const;

  /// Canonical config string; parse(to_string()) reproduces the model.
  std::string to_string() const;

  bool operator==(const DistributionModel&) const = default;

 private:
  DistributionModel(Family family, double p1, double p2, double x0) : family_(family), p1_(p1), p2_(p2), x0_(x0) {}
  void check_support(double x, const char* op) const;

  Family family_;
  double p1_;
  double p2_;
  double x0_;
};

/// Balance parameter kappa = lim f/g for the pairs with a known closed form. Returns
/// +inf for the kappa = infinity Weibull case; throws UnsupportedPairError otherwise.
double kappa_of(const DistributionModel& lifetime, const DistributionModel& censoring);

struct EventProbabilities {
  double p_uncensored = 0.0;
  double p_censored = 0.0;
};

/// int_x^inf Gbar dF: mass of uncensored observations above x (susceptibles only).
double uncensored_tail_mass(const DistributionModel& lifetime, const DistributionModel& censoring, double x);
/// int_x^inf Fbar dG: mass of censored observations above x (susceptibles only).
double censored_tail_mass(const DistributionModel& lifetime, const DistributionModel& censoring, double x);

/// Lifetime model F, censoring model G and cure fraction p (mass p on F, 1-p immune).
struct CensoringSetup {
  DistributionModel lifetime;
  DistributionModel censoring;
  double cure_fraction = 1.0;
  /// Empty when the pair has no closed-form kappa. May be +inf.
  std::optional<double> kappa;
  double p_u = 0.0;
  double p_c = 0.0;

  /// Validates p in [0,1] and fills kappa, p_u and p_c.
  static CensoringSetup make(DistributionModel lifetime, DistributionModel censoring, double cure_fraction = 1.0);

  bool proper() const { return cure_fraction == 1.0; }
  /// Largest of the two representation lower bounds.
  double x0() const;
  double joint_tail(double x) const { return lifetime.tail(x) * censoring.tail(x); }
  double joint_log_tail(double x) const { return lifetime.log_tail(x) + censoring.log_tail(x); }
  /// h = fg / (f + g), the auxiliary function of the observed-time tail.
  double joint_auxiliary(double x) const;
  std::string describe() const;
};

/// (p_u, p_c) for the population: p_u = p * int Gbar dF. Closed forms are used for
/// Exp/Exp and equal-shape Weibull pairs, adaptive quadrature otherwise.
EventProbabilities event_probabilities(const CensoringSetup& setup);
/// Susceptible-conditional (p = 1) values for a pair.
EventProbabilities event_probabilities(const DistributionModel& lifetime, const DistributionModel& censoring);

}  // namespace cevt
