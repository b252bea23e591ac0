#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cevt/dist_models.hpp"

namespace cevt {

/// One verification check. pass <=> observed <= threshold; interval and trend checks
/// are phrased as deviations or violation counts so the rule stays the same.
struct CheckRow {
  std::string check;
  std::string statistic;
  double observed = 0.0;
  double threshold = 0.0;
  std::size_t sample_size = 0;
  bool pass = false;
  std::string detail;
};

struct PresetContext {
  std::uint64_t seed = 42;
  unsigned threads = 0;
  /// Threshold overrides keyed by check name.
  std::map<std::string, double> tolerances;
};

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
/// Names of the checks a preset emits, in emission order.
std::vector<std::string> preset_check_names(const std::string& preset);
/// Checks run by `verify` on a user-supplied pair with balance parameter kappa.
std::vector<std::string> custom_check_names(double kappa);

std::vector<CheckRow> run_preset(const std::string& name, const PresetContext& context);
/// Requires a proper lifetime distribution and a finite kappa.
std::vector<CheckRow> run_custom_verify(const CensoringSetup& setup, std::size_t n, std::size_t reps,
                                        const PresetContext& context);

// Building blocks shared with the acceptance suite.

struct RatioLawMonteCarlo {
  double kappa = 0.0;
  std::vector<double> x;
  /// P[max > 0, max - Y_u > x max] with max = Y_u v Y_c: the ratio (max - Y_u)/max.
  std::vector<double> ratio_tail;
  /// P[(1 - x) Y_c > Y_u].
  std::vector<double> event_tail;
  std::size_t draws = 0;
};

/// Independent Gumbel pair Y_u ~ exp(-e^{-y}/(1+kappa)), Y_c ~ exp(-kappa e^{-y}/(1+kappa)).
/// Results do not depend on the thread count.
RatioLawMonteCarlo ratio_law_monte_carlo(double kappa, const std::vector<double>& x, std::size_t draws,
                                         std::uint64_t seed, unsigned threads);

}  // namespace cevt
