#pragma once

#include <cstddef>
#include <vector>

#include "cevt/censor_sim.hpp"

namespace cevt {

/// Product-limit estimate as a step table. survivor_values[i] is the estimate just after
/// the jump at jump_times[i]; jumps occur only at uncensored times.
struct KMECurve {
  std::vector<double> jump_times;
  std::vector<double> survivor_values;
  /// Estimate at the largest observation; positive iff that observation is censored.
  double plateau_level = 1.0;
  /// M - M_u, the length of the terminal flat segment (M when nothing is uncensored).
  double level_stretch = 0.0;
  /// Censored times strictly above M_u.
  std::size_t exceed_count = 0;
  bool has_uncensored = false;

  /// Estimate at time t (right-continuous).
  double survival_at(double t) const;
};

/// Ties between censored and uncensored times are resolved uncensored-first, so a
/// subject censored at t is still at risk for deaths at t. Requires n >= 1.
KMECurve fit_kme(const SurvivalSample& sample);

struct LevelStretch {
  double length = 0.0;
  std::size_t exceed_count = 0;
  /// False when the sample has no uncensored time; length is then M itself.
  bool has_uncensored = false;
};

LevelStretch level_stretch(const KMECurve& curve);
LevelStretch level_stretch(const SurvivalSample& sample);

}  // namespace cevt
