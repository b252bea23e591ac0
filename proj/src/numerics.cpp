#include "cevt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "cevt/errors.hpp"

namespace cevt::numerics {

namespace {

constexpr double kMillsSwitch = 3.0;
constexpr int kMillsTerms = 60;

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& opts,
                           const char* what) {
  if (!(a <= b)) throw DomainError(std::string(what) + ": integration bounds out of order");
  if (a == b) return {};
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, opts.max_depth, opts.rel_tol, &error, &l1);
  if (!std::isfinite(value)) throw QuadratureError(std::string(what) + ": non-finite value", value, error);
  const double allowed = std::max(opts.abs_tol, opts.rel_tol * std::max(std::abs(value), l1));
  if (error > allowed) throw QuadratureError(std::string(what) + ": tolerance not reached", value, error);
  return {value, error};
}

QuadratureResult integrate_to_infinity(const Integrand& f, double a, double scale,
                                       const QuadratureOptions& opts, const char* what) {
  if (!(scale > 0.0)) throw DomainError(std::string(what) + ": scale must be positive");
  auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    const double s = a + scale * t / one_minus;
    if (!std::isfinite(s)) return 0.0;
    const double v = f(s);
    return v == 0.0 ? 0.0 : v * scale / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, opts, what);
}

QuadratureResult integrate_real_line(const Integrand& f, double centre, double scale,
                                     const QuadratureOptions& opts, const char* what) {
  const auto upper = integrate_to_infinity(f, centre, scale, opts, what);
  const auto lower = integrate_to_infinity([&](double s) { return f(2.0 * centre - s); }, centre, scale,
                                           opts, what);
  return {upper.value + lower.value, upper.error + lower.error};
}

double bisect(const std::function<double(double)>& g, double lo, double hi, double rel_width) {
  double g_lo = g(lo);
  const double g_hi = g(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo < 0.0) == (g_hi < 0.0)) throw BracketError("bisect: no sign change on bracket");
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_width * std::max(1.0, std::abs(mid))) return mid;
    const double g_mid = g(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double solve_decreasing(const std::function<double(double)>& decreasing, double target, double start,
                        double rel_width) {
  if (decreasing(start) < target) throw BracketError("target above the value at the lower bound");
  double lo = start;
  double step = std::max(1.0, std::abs(start));
  double hi = start + step;
  int doublings = 0;
  while (decreasing(hi) >= target) {
    lo = hi;
    step *= 2.0;
    hi = start + step;
    if (++doublings > 1100 || !std::isfinite(hi)) throw BracketError("no upper bracket found");
  }
  return bisect([&](double x) { return decreasing(x) - target; }, lo, hi, rel_width);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double log_normal_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi); }

double mills_ratio(double z) {
  if (z < kMillsSwitch) return phi_bar(z) / normal_pdf(z);
  double t = z;
  for (int k = kMillsTerms; k >= 1; --k) t = z + k / t;
  return 1.0 / t;
}

double phi_bar(double z) {
  if (z < kMillsSwitch) return 0.5 * std::erfc(z / std::numbers::sqrt2);
  return std::exp(log_phi_bar(z));
}

double log_phi_bar(double z) {
  if (z < kMillsSwitch) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  return std::log(mills_ratio(z)) + log_normal_pdf(z);
}

double phi_bar_inverse(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("phi_bar_inverse: probability outside [0,1]");
  if (q == 0.0) return kInf;
  if (q == 1.0) return -kInf;
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

}  // namespace cevt::numerics
