#include "cevt/evt_limits.hpp"

#include <algorithm>
#include <cmath>

#include "cevt/errors.hpp"
#include "cevt/numerics.hpp"

namespace cevt {

namespace {

using numerics::kInf;

constexpr double kTrendSlack = 1e-9;

void require_finite_kappa(double kappa, const char* op) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw DomainError(std::string(op) + ": kappa must be finite and non-negative");
}

void require_proper(const CensoringSetup& setup, const char* op) {
  if (!setup.proper()) throw DomainError(std::string(op) + ": requires cure fraction 1");
}

double require_setup_kappa(const CensoringSetup& setup, const char* op) {
  if (!setup.kappa) throw UnsupportedPairError(std::string(op) + ": no kappa for " + setup.describe());
  require_finite_kappa(*setup.kappa, op);
  return *setup.kappa;
}

bool non_increasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

}  // namespace

double solve_joint_tail_level(const CensoringSetup& setup, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("tail level must lie in (0, 1)");
  const double start = setup.x0();
  const double target = std::log(level);
  if (setup.joint_log_tail(start) < target)
    throw BracketError("Hbar(x0) is below the requested level; the representation interval starts too far right");
  return numerics::solve_decreasing([&](double x) { return setup.joint_log_tail(x); }, target, start);
}

NormingConstants norming_constants(const CensoringSetup& setup, std::size_t n) {
  if (n < 2) throw DomainError("norming_constants: n must be at least 2");
  require_proper(setup, "norming_constants");
  const double b = solve_joint_tail_level(setup, 1.0 / static_cast<double>(n));
  if (!(b > setup.x0())) throw BracketError("norming_constants: b_n does not exceed x0");
  return {n, b, setup.joint_auxiliary(b)};
}

double l_law_cdf(double kappa, double x) {
  require_finite_kappa(kappa, "l_law_cdf");
  if (!(x >= 0.0)) throw DomainError("l_law_cdf: L is non-negative, x must be >= 0");
  return 1.0 / (1.0 + kappa * std::exp(-x));
}

double l_law_tail(double kappa, double x) {
  require_finite_kappa(kappa, "l_law_tail");
  if (!(x >= 0.0)) throw DomainError("l_law_tail: L is non-negative, x must be >= 0");
  if (std::isinf(x)) return 0.0;
  return kappa / (std::exp(x) + kappa);
}

double r_law_tail(double kappa, double x) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("r_law_tail: kappa must lie in (0, inf)");
  if (!(x > 0.0 && x < 1.0)) throw DomainError("r_law_tail: x must lie in (0, 1)");

  // With w = u^{1-x} the factor (1-x) u^{-x} du becomes dw, removing the singularity
  // at u = 0:  P = d * int_0^inf (1 - exp(-c w^p)) exp(-d w) dw,  p = 1/(1-x).
  const double d = 1.0 / (1.0 + kappa);
  const double c = kappa * d;
  const double p = 1.0 / (1.0 - x);
  auto integrand = [&](double w) { return -std::expm1(-c * std::pow(w, p)) * std::exp(-d * w); };

  numerics::QuadratureOptions opts;
  opts.abs_tol = 1e-11;
  double total = numerics::integrate(integrand, 0.0, 1.0, opts, "r_law_tail").value;

  // Blocks of doubling width on [1, inf) until the exp(-d w) envelope, whose remaining
  // integral is exp(-d w)/d, drops below 1e-12 of the running estimate.
  double lo = 1.0;
  double width = 1.0 + kappa;
  for (int block = 0; block < 64; ++block) {
    const double hi = lo + width;
    total += numerics::integrate(integrand, lo, hi, opts, "r_law_tail").value;
    lo = hi;
    width *= 2.0;
    if (std::exp(-d * lo) / d < 1e-12 * std::max(total, 1e-300)) break;
  }
  return d * total;
}

double count_law_pmf(double kappa, std::size_t j) {
  require_finite_kappa(kappa, "count_law_pmf");
  if (kappa == 0.0) return j == 0 ? 1.0 : 0.0;
  const double success = kappa / (1.0 + kappa);
  return std::exp(std::log1p(-success) + static_cast<double>(j) * std::log(success));
}

double poisson_mixture_pmf(double kappa, std::size_t j) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("poisson_mixture_pmf: kappa must lie in (0, inf)");
  const double jd = static_cast<double>(j);
  const double log_fact = std::lgamma(jd + 1.0);
  auto integrand = [&](double e) {
    if (e <= 0.0) return j == 0 ? 1.0 : 0.0;
    return std::exp(-(kappa + 1.0) * e + jd * std::log(kappa * e) - log_fact);
  };
  numerics::QuadratureOptions opts;
  opts.abs_tol = 1e-14;
  return numerics::integrate_to_infinity(integrand, 0.0, (jd + 1.0) / (kappa + 1.0), opts, "poisson_mixture_pmf")
      .value;
}

double gumbel_marginal_cdf(double t, double x) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("gumbel_marginal_cdf: t must be positive");
  return std::exp(-t * std::exp(-x));
}

LimitLaw LimitLaw::l_law(double kappa) {
  require_finite_kappa(kappa, "LimitLaw::l_law");
  return {Kind::LLaw, kappa, 1.0};
}

LimitLaw LimitLaw::r_law(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("LimitLaw::r_law: kappa must lie in (0, inf)");
  return {Kind::RLaw, kappa, 1.0};
}

LimitLaw LimitLaw::geometric_count(double kappa) {
  require_finite_kappa(kappa, "LimitLaw::geometric_count");
  return {Kind::GeomCount, kappa, 1.0};
}

LimitLaw LimitLaw::gumbel_marginal(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("LimitLaw::gumbel_marginal: t must be positive");
  return {Kind::GumbelMarginal, 0.0, t};
}

double LimitLaw::cdf(double x) const {
  switch (kind_) {
    case Kind::LLaw:
      return x < 0.0 ? 0.0 : l_law_cdf(kappa_, x);
    case Kind::RLaw:
      if (x < 0.0) return 0.0;
      if (x == 0.0) return 1.0 / (1.0 + kappa_);
      if (x >= 1.0) return 1.0;
      return 1.0 - r_law_tail(kappa_, x);
    case Kind::GeomCount: {
      if (x < 0.0) return 0.0;
      if (kappa_ == 0.0) return 1.0;
      const double success = kappa_ / (1.0 + kappa_);
      return -std::expm1((std::floor(x) + 1.0) * std::log(success));
    }
    case Kind::GumbelMarginal:
      return gumbel_marginal_cdf(t_, x);
  }
  return 0.0;
}

double LimitLaw::tail(double x) const { return 1.0 - cdf(x); }

double LimitLaw::pmf(std::size_t j) const {
  if (kind_ != Kind::GeomCount) throw DomainError("LimitLaw::pmf: only defined for the count law");
  return count_law_pmf(kappa_, j);
}

double LimitLaw::quantile(double p) const {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("LimitLaw::quantile: p must lie in [0, 1)");
  switch (kind_) {
    case Kind::LLaw:
      if (p <= 1.0 / (1.0 + kappa_)) return 0.0;
      return std::log(p * kappa_ / (1.0 - p));
    case Kind::RLaw:
      throw DomainError("LimitLaw::quantile: the ratio-law integral is not monotone in x; no quantile function");
    case Kind::GeomCount: {
      if (kappa_ == 0.0) return 0.0;
      const double success = kappa_ / (1.0 + kappa_);
      const double j = std::ceil(std::log1p(-p) / std::log(success) - 1.0 - 1e-12);
      return std::max(0.0, j);
    }
    case Kind::GumbelMarginal:
      if (p == 0.0) return -kInf;
      return -std::log(-std::log(p) / t_);
  }
  return 0.0;
}

double LimitLaw::sample(RandomStream& rng) const {
  if (kind_ == Kind::GumbelMarginal) return rng.standard_gumbel() + std::log(t_);
  return quantile(rng.uniform());
}

double success_prob(const CensoringSetup& setup, double t) {
  require_proper(setup, "success_prob");
  const double lower = std::min(setup.lifetime.support_lower(), setup.censoring.support_lower());
  if (t <= lower) return 1.0;
  const double total = censored_tail_mass(setup.lifetime, setup.censoring, lower);
  if (!(total > 0.0)) throw QuadratureError("success_prob: zero censored mass", total, 0.0);
  return censored_tail_mass(setup.lifetime, setup.censoring, t) / total;
}

std::vector<double> default_tail_grid(const CensoringSetup& setup) {
  std::vector<double> grid;
  for (double level : {1e-2, 1e-4, 1e-6, 1e-8}) grid.push_back(solve_joint_tail_level(setup, level));
  return grid;
}

TailAsymptoticsReport check_tail_asymptotics(const CensoringSetup& setup, std::span<const double> x_grid) {
  require_proper(setup, "check_tail_asymptotics");
  const double kappa = require_setup_kappa(setup, "check_tail_asymptotics");
  TailAsymptoticsReport report;
  report.kappa = kappa;
  report.uncensored.target = 1.0 / (1.0 + kappa);
  report.censored.target = kappa / (1.0 + kappa);
  for (double x : x_grid) {
    const double hbar = setup.joint_tail(x);
    if (!(hbar > 0.0)) throw DomainError("check_tail_asymptotics: Hbar underflows at grid point");
    const double u = uncensored_tail_mass(setup.lifetime, setup.censoring, x) / hbar;
    const double c = censored_tail_mass(setup.lifetime, setup.censoring, x) / hbar;
    for (auto* r : {&report.uncensored, &report.censored}) r->grid.push_back(x);
    report.uncensored.values.push_back(u);
    report.censored.values.push_back(c);
    report.uncensored.discrepancies.push_back(std::abs(u - report.uncensored.target));
    report.censored.discrepancies.push_back(std::abs(c - report.censored.target));
    report.fubini_residuals.push_back(std::abs(u + c - 1.0));
  }
  report.uncensored.monotone = non_increasing(report.uncensored.discrepancies, kTrendSlack);
  report.censored.monotone = kappa == 0.0 ? strictly_decreasing(report.censored.values)
                                          : non_increasing(report.censored.discrepancies, kTrendSlack);
  return report;
}

ConverseReport check_converse(const CensoringSetup& setup, std::span<const double> x_grid) {
  require_proper(setup, "check_converse");
  const double kappa = require_setup_kappa(setup, "check_converse");
  if (!(kappa > 0.0)) throw DomainError("check_converse: requires 0 < kappa < inf (0 < k < 1)");
  if (x_grid.empty()) throw DomainError("check_converse: empty grid");
  ConverseReport report;
  for (double x : x_grid) {
    const double k = uncensored_tail_mass(setup.lifetime, setup.censoring, x) / setup.joint_tail(x);
    const double ratio = setup.lifetime.auxiliary(x) / setup.censoring.auxiliary(x);
    report.grid.push_back(x);
    report.k_estimates.push_back(k);
    report.hazard_ratios.push_back(ratio);
    report.discrepancies.push_back(std::abs((1.0 - k) / k - ratio));
  }
  report.final_discrepancy = report.discrepancies.back();
  report.shrinking = non_increasing(report.discrepancies, kTrendSlack);
  return report;
}

RegularVariationReport check_regular_variation_U(const CensoringSetup& setup, std::span<const double> t_grid,
                                                 double x) {
  const double kappa = require_setup_kappa(setup, "check_regular_variation_U");
  if (!(x > 0.0)) throw DomainError("check_regular_variation_U: x must be positive");
  // log U(t) = -log Gbar(Fbar^{-1}(1/t)); also returns the quantile used.
  auto log_u = [&](double t, double* quantile) {
    if (!(t >= 1.0)) throw DomainError("check_regular_variation_U: t must be >= 1");
    const double s = setup.lifetime.inverse_tail(1.0 / t);
    if (!std::isfinite(s)) throw DomainError("check_regular_variation_U: quantile inversion failed at t");
    if (quantile) *quantile = s;
    return -setup.censoring.log_tail(s);
  };
  RegularVariationReport report;
  report.x = x;
  report.target = std::pow(x, kappa);
  for (double t : t_grid) {
    double s = 0.0;
    const double lu = log_u(t, &s);
    const double ratio = std::exp(log_u(t * x, nullptr) - lu);
    report.t_grid.push_back(t);
    report.ratios.push_back(ratio);
    report.discrepancies.push_back(std::abs(ratio - report.target));
    // Fbar(s) = 1/t at the quantile, so Fbar/Gbar = exp(log U(t) - log t).
    report.tail_ratios.push_back(std::exp(lu - std::log(t)));
  }
  report.monotone = non_increasing(report.discrepancies, kTrendSlack * std::max(1.0, report.target));
  if (kappa > 1.0)
    report.dominance_consistent = strictly_increasing(report.tail_ratios);
  else if (kappa < 1.0)
    report.dominance_consistent = strictly_decreasing(report.tail_ratios);
  else
    report.dominance_consistent = true;
  return report;
}

}  // namespace cevt
