#pragma once

#include <functional>
#include <limits>

namespace cevt::numerics {

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  unsigned max_depth = 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) on a finite interval. Throws QuadratureError when
/// the error estimate exceeds max(abs_tol, rel_tol*|value|).
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& opts = {},
                           const char* what = "quadrature");

/// Integral over [a, inf) through s = a + scale * t / (1 - t). `scale` should be of the
/// order of the decay length of f near a.
QuadratureResult integrate_to_infinity(const Integrand& f, double a, double scale = 1.0,
                                       const QuadratureOptions& opts = {},
                                       const char* what = "quadrature");

/// Integral over the whole real line, split at `centre`.
QuadratureResult integrate_real_line(const Integrand& f, double centre = 0.0, double scale = 1.0,
                                     const QuadratureOptions& opts = {},
                                     const char* what = "quadrature");

/// Bisection on a bracket [lo, hi] with g(lo) and g(hi) of opposite sign, stopping when
/// the bracket is narrower than rel_width * max(1, |midpoint|).
double bisect(const std::function<double(double)>& g, double lo, double hi, double rel_width = 1e-12);

/// Smallest x >= start with decreasing(x) <= target, bracketed by doubling the step
/// upward from `start` and then refined by bisection. `decreasing` must be non-increasing.
double solve_decreasing(const std::function<double(double)>& decreasing, double target, double start,
                        double rel_width = 1e-12);

// Standard normal helpers. The Mills ratio is evaluated by continued fraction in the
// upper tail so that phi_bar and log_phi_bar keep full relative accuracy past 1e-300.
double normal_pdf(double z);
double log_normal_pdf(double z);
double mills_ratio(double z);  // phi_bar(z) / phi(z)
double phi_bar(double z);      // 1 - Phi(z)
double log_phi_bar(double z);
double phi_bar_inverse(double q);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace cevt::numerics
