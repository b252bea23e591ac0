#include "cevt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cevt/errors.hpp"
#include "cevt/evt_limits.hpp"
#include "cevt/numerics.hpp"

namespace cevt {

namespace {

constexpr std::size_t kMinKsReplications = 100;
constexpr std::size_t kMinCountReplications = 1000;
constexpr std::size_t kPooledCell = 8;

void require_replications(std::size_t usable, std::size_t minimum, const char* op) {
  if (usable < minimum)
    throw InsufficientReplicationsError(std::string(op) + ": needs at least " + std::to_string(minimum) +
                                        " usable replications, got " + std::to_string(usable));
}

std::vector<std::size_t> exceedance_counts(const ReplicationResult& results) {
  std::vector<std::size_t> counts;
  counts.reserve(results.stats.size());
  for (const auto& s : results.stats)
    if (s.max_uncensored) counts.push_back(s.censored_exceedances);
  return counts;
}

FitReport make_report(StatisticKind kind, double observed, double threshold, std::size_t m, std::size_t dropped) {
  return {kind, observed, threshold, m, dropped, observed <= threshold};
}

}  // namespace

std::string_view statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::KS:
      return "KS";
    case StatisticKind::TV:
      return "TV";
    case StatisticKind::ChiSquare:
      return "chi-square";
  }
  return "?";
}

double ks_null_bound(std::size_t m) { return 1.36 / std::sqrt(static_cast<double>(m)); }

double ks_distance(std::span<const double> values, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left) {
  if (values.empty()) throw DomainError("ks_distance: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i];
    const std::size_t before = i;
    while (i < sorted.size() && sorted[i] == v) ++i;
    d = std::max({d, std::abs(static_cast<double>(i) / m - cdf(v)),
                  std::abs(static_cast<double>(before) / m - cdf_left(v))});
  }
  return d;
}

double tv_distance(std::span<const std::size_t> counts, const std::function<double(std::size_t)>& pmf,
                   double min_mass) {
  if (counts.empty()) throw DomainError("tv_distance: no counts");
  const std::size_t largest = *std::max_element(counts.begin(), counts.end());
  std::size_t last = 0;
  while (pmf(last + 1) >= min_mass) ++last;
  const std::size_t top = std::max(largest, last);
  std::vector<double> empirical(top + 1, 0.0);
  const double m = static_cast<double>(counts.size());
  for (auto c : counts) empirical[c] += 1.0 / m;
  double total = 0.0;
  for (std::size_t j = 0; j <= top; ++j) total += std::abs(empirical[j] - pmf(j));
  return 0.5 * total;
}

FitReport ks_against_l_law(const ReplicationResult& results, double kappa, std::optional<double> threshold) {
  if (!results.norming) throw DomainError("ks_against_l_law: replications were run without norming constants");
  if (!std::isfinite(kappa) || kappa < 0.0) throw DomainError("ks_against_l_law: kappa must be finite");
  std::vector<double> values;
  for (const auto& s : results.stats)
    if (s.norm_l) values.push_back(*s.norm_l);
  require_replications(values.size(), kMinKsReplications, "ks_against_l_law");
  const auto law = LimitLaw::l_law(kappa);
  const double d = ks_distance(
      values, [&](double x) { return law.cdf(x); }, [&](double x) { return x <= 0.0 ? 0.0 : law.cdf(x); });
  return make_report(StatisticKind::KS, d, threshold.value_or(ks_null_bound(values.size()) + 0.03), values.size(),
                     results.stats.size() - values.size());
}

FitReport fit_count_law(const ReplicationResult& results, double kappa, std::optional<double> threshold) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("fit_count_law: kappa must lie in (0, inf)");
  const auto counts = exceedance_counts(results);
  require_replications(counts.size(), kMinCountReplications, "fit_count_law");
  const double tv = tv_distance(counts, [&](std::size_t j) { return count_law_pmf(kappa, j); });
  return make_report(StatisticKind::TV, tv, threshold.value_or(0.05), counts.size(),
                     results.stats.size() - counts.size());
}

FitReport chi_square_count_law(const ReplicationResult& results, double kappa, std::optional<double> threshold) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("chi_square_count_law: kappa must lie in (0, inf)");
  const auto counts = exceedance_counts(results);
  require_replications(counts.size(), kMinCountReplications, "chi_square_count_law");
  std::vector<double> observed(kPooledCell + 1, 0.0);
  for (auto c : counts) observed[std::min(c, kPooledCell)] += 1.0;
  const double m = static_cast<double>(counts.size());
  double pooled_mass = 1.0;
  double stat = 0.0;
  for (std::size_t j = 0; j <= kPooledCell; ++j) {
    const double mass = j < kPooledCell ? count_law_pmf(kappa, j) : pooled_mass;
    pooled_mass -= mass;
    const double expected = m * mass;
    stat += (observed[j] - expected) * (observed[j] - expected) / expected;
  }
  const double critical =
      boost::math::quantile(boost::math::chi_squared(static_cast<double>(kPooledCell)), 0.999);
  return make_report(StatisticKind::ChiSquare, stat, threshold.value_or(critical), counts.size(),
                     results.stats.size() - counts.size());
}

FitReport check_np_limit(const ReplicationResult& results, const CensoringSetup& setup,
                         std::optional<double> threshold) {
  if (!setup.proper()) throw DomainError("check_np_limit: requires cure fraction 1");
  if (!setup.kappa || !(*setup.kappa > 0.0) || !std::isfinite(*setup.kappa))
    throw DomainError("check_np_limit: requires 0 < kappa < inf");
  const double mean = *setup.kappa / setup.p_c;
  const double n = static_cast<double>(results.n);
  std::vector<double> values;
  for (const auto& s : results.stats)
    if (s.max_uncensored) values.push_back(n * success_prob(setup, *s.max_uncensored));
  require_replications(values.size(), kMinKsReplications, "check_np_limit");
  auto cdf = [&](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x / mean); };
  const double d = ks_distance(values, cdf, cdf);
  return make_report(StatisticKind::KS, d, threshold.value_or(ks_null_bound(values.size()) + 0.02), values.size(),
                     results.stats.size() - values.size());
}

double estimate_kappa(std::span<const std::size_t> exceedance_counts) {
  if (exceedance_counts.empty()) throw InsufficientReplicationsError("estimate_kappa: no usable replications");
  double sum = 0.0;
  for (auto c : exceedance_counts) sum += static_cast<double>(c);
  return sum / static_cast<double>(exceedance_counts.size());
}

double estimate_kappa(const ReplicationResult& results) { return estimate_kappa(exceedance_counts(results)); }

double estimate_kappa(const ExtremeStats& stats) { return static_cast<double>(stats.censored_exceedances); }

std::string_view outcome_name(CureTestOutcome outcome) {
  switch (outcome) {
    case CureTestOutcome::Reject:
      return "reject";
    case CureTestOutcome::DoNotReject:
      return "do-not-reject";
    case CureTestOutcome::LevelUnattainable:
      return "level-unattainable";
    case CureTestOutcome::NoCriticalValue:
      return "no-critical-value";
  }
  return "?";
}

std::string_view source_name(CureTestSource source) {
  return source == CureTestSource::SingleSample ? "single-sample" : "aggregated-replications";
}

CureTestResult cure_test(double observed_r, double alpha, double kappa_hat, CureTestSource source) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("cure_test: alpha must lie in (0, 1)");
  if (!(kappa_hat >= 0.0) || !std::isfinite(kappa_hat)) throw DomainError("cure_test: kappa_hat must be finite, >= 0");
  if (!std::isfinite(observed_r) || observed_r < 0.0) throw DomainError("cure_test: observed R must be >= 0");

  CureTestResult result;
  result.kappa_hat = kappa_hat;
  result.observed_r = observed_r;
  result.alpha = alpha;
  result.source = source;

  if (kappa_hat == 0.0) {
    // P(R = 0) = 1 under kappa = 0, so any positive R is evidence against H0.
    result.critical_value = 0.0;
    result.reject = observed_r > 0.0;
  } else if (alpha > kappa_hat / (1.0 + kappa_hat)) {
    result.outcome = CureTestOutcome::LevelUnattainable;
    return result;
  } else {
    constexpr double kEdge = 1e-6;
    auto excess = [&](double c) { return r_law_tail(kappa_hat, c) - alpha; };
    const double lo = excess(kEdge);
    const double hi = excess(1.0 - kEdge);
    if ((lo < 0.0) == (hi < 0.0)) {
      result.outcome = CureTestOutcome::NoCriticalValue;
      return result;
    }
    result.critical_value = numerics::bisect(excess, kEdge, 1.0 - kEdge, 1e-10);
    result.reject = observed_r > *result.critical_value;
  }
  result.outcome = result.reject ? CureTestOutcome::Reject : CureTestOutcome::DoNotReject;
  return result;
}

CureTestResult cure_test(const SurvivalSample& sample, double alpha, std::optional<double> kappa_hat) {
  const auto stats = extreme_stats(sample, std::nullopt);
  // No uncensored time at all: the whole range is level stretch.
  const double r = stats.norm_r.value_or(stats.max_uncensored ? 0.0 : 1.0);
  return cure_test(r, alpha, kappa_hat.value_or(estimate_kappa(stats)), CureTestSource::SingleSample);
}

CureTestResult cure_test(const ReplicationResult& results, double alpha, std::optional<double> kappa_hat) {
  double sum = 0.0;
  std::size_t m = 0;
  for (const auto& s : results.stats) {
    if (!s.norm_r) continue;
    sum += *s.norm_r;
    ++m;
  }
  if (m == 0) throw InsufficientReplicationsError("cure_test: no replication has an observed R");
  return cure_test(sum / static_cast<double>(m), alpha, kappa_hat.value_or(estimate_kappa(results)),
                   CureTestSource::AggregatedReplications);
}

}  // namespace cevt
