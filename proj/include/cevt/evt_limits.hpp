#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cevt/dist_models.hpp"

namespace cevt {

/// Centering b_n and scale a_n for the maximum of n observed times: n * Hbar(b_n) = 1 and
/// a_n = h(b_n) with h = fg / (f + g).
struct NormingConstants {
  std::size_t n = 0;
  double b_n = 0.0;
  double a_n = 0.0;
};

/// Solves Hbar(x) = level on [x0, inf) by doubling search and bisection. Throws
/// BracketError when Hbar(x0) < level.
double solve_joint_tail_level(const CensoringSetup& setup, double level);

/// Requires n >= 2 and a proper lifetime distribution (cure fraction 1).
NormingConstants norming_constants(const CensoringSetup& setup, std::size_t n);

// --- limit laws -----------------------------------------------------------------

/// P[L <= x] = 1 / (1 + kappa e^{-x}) for x >= 0; the atom at 0 is 1/(1+kappa).
double l_law_cdf(double kappa, double x);
/// P[L > x] = kappa / (e^x + kappa).
double l_law_tail(double kappa, double x);

/// The closed ratio-law integral
///   (1-x)/(1+kappa) * int_0^inf (1 - e^{-kappa u/(1+kappa)}) e^{-u^{1-x}/(1+kappa)} u^{-x} du
/// for 0 < x < 1 and 0 < kappa < inf, by adaptive quadrature (absolute error <= 1e-8).
double r_law_tail(double kappa, double x);

/// Geometric law with success probability kappa/(1+kappa): (1-p) p^j.
double count_law_pmf(double kappa, std::size_t j);

/// int_0^inf Poisson(j; kappa e) e^{-e} de, by quadrature.
double poisson_mixture_pmf(double kappa, std::size_t j);

/// Lambda^t(x) = exp(-t e^{-x}).
double gumbel_marginal_cdf(double t, double x);

/// A limit law as a value. Constructors reject kappa = inf (the limit theorems need a
/// finite balance parameter) and negative or NaN parameters.
class LimitLaw {
 public:
  enum class Kind { LLaw, RLaw, GeomCount, GumbelMarginal };

  static LimitLaw l_law(double kappa);
  static LimitLaw r_law(double kappa);
  static LimitLaw geometric_count(double kappa);
  static LimitLaw gumbel_marginal(double t);

  Kind kind() const { return kind_; }
  double kappa() const { return kappa_; }
  double time() const { return t_; }

  double cdf(double x) const;
  double tail(double x) const;
  double pmf(std::size_t j) const;  // GeomCount only
  /// Generalised inverse inf{x : cdf(x) >= p}. Not available for RLaw.
  double quantile(double p) const;
  double sample(RandomStream& rng) const;  // LLaw, GeomCount, GumbelMarginal

 private:
  LimitLaw(Kind kind, double kappa, double t) : kind_(kind), kappa_(kappa), t_(t) {}
  Kind kind_;
  double kappa_;
  double t_;
};

// --- success probability and asymptotic checks ------------------------------------

/// p(t) = int_t^inf Fbar dG / int Fbar dG, the chance a censored time exceeds t.
double success_prob(const CensoringSetup& setup, double t);

/// Default tail grid: x with Hbar(x) in {1e-2, 1e-4, 1e-6, 1e-8}.
std::vector<double> default_tail_grid(const CensoringSetup& setup);

/// Sequence of discrepancies plus a monotone-trend flag.
struct ConvergenceReport {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> discrepancies;
  double target = 0.0;
  bool monotone = false;
};

struct TailAsymptoticsReport {
  double kappa = 0.0;
  /// int_x^inf Gbar dF / Hbar(x) against 1/(1+kappa).
  ConvergenceReport uncensored;
  /// int_x^inf Fbar dG / Hbar(x) against kappa/(1+kappa); for kappa = 0 the target is 0
  /// and `monotone` reports a strict decrease.
  ConvergenceReport censored;
  /// |uncensored + censored - 1| at each grid point.
  std::vector<double> fubini_residuals;
};

TailAsymptoticsReport check_tail_asymptotics(const CensoringSetup& setup, std::span<const double> x_grid);

struct ConverseReport {
  std::vector<double> grid;
  std::vector<double> k_estimates;
  std::vector<double> hazard_ratios;  // f(x)/g(x)
  std::vector<double> discrepancies;  // |(1-k)/k - f/g|
  double final_discrepancy = 0.0;
  bool shrinking = false;
};

/// Requires 0 < kappa < inf and grid points beyond x0.
ConverseReport check_converse(const CensoringSetup& setup, std::span<const double> x_grid);

struct RegularVariationReport {
  double x = 0.0;
  double target = 0.0;  // x^kappa
  std::vector<double> t_grid;
  std::vector<double> ratios;  // U(tx)/U(t)
  std::vector<double> discrepancies;
  bool monotone = false;
  /// Fbar/Gbar at the lifetime quantiles 1/t.
  std::vector<double> tail_ratios;
  /// Whether the Fbar/Gbar trend agrees with kappa > 1 (growing) or kappa < 1 (shrinking);
  /// always true for kappa == 1 where no direction is implied.
  bool dominance_consistent = false;
};

/// U(t) = 1 / Gbar(Fbar^{-1}(1/t)); reports U(tx)/U(t) against x^kappa.
RegularVariationReport check_regular_variation_U(const CensoringSetup& setup, std::span<const double> t_grid, double x);

}  // namespace cevt
