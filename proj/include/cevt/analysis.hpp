#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "cevt/censor_sim.hpp"

namespace cevt {

enum class StatisticKind { KS, TV, ChiSquare };

std::string_view statistic_name(StatisticKind kind);

/// pass <=> observed <= threshold.
struct FitReport {
  StatisticKind kind = StatisticKind::KS;
  double observed = 0.0;
  double threshold = 0.0;
  std::size_t sample_size = 0;
  /// Replications dropped because M_u was absent.
  std::size_t dropped = 0;
  bool pass = false;
};

/// Null sampling bound for a KS distance at the 5% level, 1.36/sqrt(m).
double ks_null_bound(std::size_t m);

/// Kolmogorov-Smirnov distance between the empirical law of `values` and a cdf F with
/// left limits F(x-) given by `cdf_left` (they differ only at atoms).
double ks_distance(std::span<const double> values, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left);

/// Total-variation distance between the empirical pmf of `counts` and `pmf`, summed over
/// j up to the larger of the largest count and the last j with pmf(j) >= min_mass.
double tv_distance(std::span<const std::size_t> counts, const std::function<double(std::size_t)>& pmf,
                   double min_mass = 1e-6);

/// KS distance of the normalised level stretch (M - M_u)/a_n against the L-law.
/// Default threshold: ks_null_bound(m) + 0.03.
FitReport ks_against_l_law(const ReplicationResult& results, double kappa,
                           std::optional<double> threshold = std::nullopt);

/// TV distance of N_c(>M_u) against the geometric count law. Default threshold 0.05.
FitReport fit_count_law(const ReplicationResult& results, double kappa,
                        std::optional<double> threshold = std::nullopt);

/// Chi-square statistic of N_c(>M_u) against the count law, with j >= 8 pooled into one
/// cell. Default threshold: the 0.999 chi-square quantile with 8 degrees of freedom.
FitReport chi_square_count_law(const ReplicationResult& results, double kappa,
                               std::optional<double> threshold = std::nullopt);

/// KS distance of n p(M_u) against the exponential law with mean kappa/p_c.
/// Default threshold: ks_null_bound(m) + 0.02.
FitReport check_np_limit(const ReplicationResult& results, const CensoringSetup& setup,
                         std::optional<double> threshold = std::nullopt);

/// Mean of N_c(>M_u) over replications with an uncensored observation.
double estimate_kappa(const ReplicationResult& results);
double estimate_kappa(std::span<const std::size_t> exceedance_counts);
/// Single-sample mode: the observed count itself.
double estimate_kappa(const ExtremeStats& stats);

enum class CureTestOutcome {
  Reject,
  DoNotReject,
  /// alpha exceeds P[R > 0] = kappa/(1+kappa): the level cannot be attained.
  LevelUnattainable,
  /// The ratio-law tail never equals alpha on (0, 1).
  NoCriticalValue,
};

enum class CureTestSource { SingleSample, AggregatedReplications };

std::string_view outcome_name(CureTestOutcome outcome);
std::string_view source_name(CureTestSource source);

struct CureTestResult {
  double kappa_hat = 0.0;
  double observed_r = 0.0;
  std::optional<double> critical_value;
  double alpha = 0.0;
  bool reject = false;
  CureTestOutcome outcome = CureTestOutcome::DoNotReject;
  CureTestSource source = CureTestSource::SingleSample;
};

/// Test of H0: kappa = 0 from an observed ratio R = (M - M_u)/M. With kappa_hat = 0
/// any R > 0 rejects; otherwise c_alpha solves r_law_tail(kappa_hat, c) = alpha by
/// bisection on (0, 1) and the test rejects iff R > c_alpha.
CureTestResult cure_test(double observed_r, double alpha, double kappa_hat,
                         CureTestSource source = CureTestSource::SingleSample);
/// Single sample: R from the sample; kappa_hat defaults to its exceedance count.
CureTestResult cure_test(const SurvivalSample& sample, double alpha, std::optional<double> kappa_hat);
/// Replications: R is the mean of norm_R; kappa_hat defaults to estimate_kappa.
CureTestResult cure_test(const ReplicationResult& results, double alpha, std::optional<double> kappa_hat);

}  // namespace cevt
