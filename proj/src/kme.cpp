#include "cevt/kme.hpp"

#include <algorithm>
#include <stdexcept>

#include "cevt/errors.hpp"

namespace cevt {

double KMECurve::survival_at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return 1.0;
  return survivor_values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

KMECurve fit_kme(const SurvivalSample& sample) {
  if (sample.observations.empty()) throw DomainError("fit_kme: empty sample");
  std::vector<Observation> sorted = sample.observations;
  std::sort(sorted.begin(), sorted.end(), [](const Observation& a, const Observation& b) {
    if (a.time != b.time) return a.time < b.time;
    return !a.censored && b.censored;
  });

  KMECurve curve;
  double survivor = 1.0;
  std::size_t at_risk = sorted.size();
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].time;
    std::size_t deaths = 0;
    std::size_t removed = 0;
    for (; i < sorted.size() && sorted[i].time == t; ++i, ++removed)
      if (!sorted[i].censored) ++deaths;
    if (deaths > 0) {
      survivor *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      curve.jump_times.push_back(t);
      curve.survivor_values.push_back(survivor);
    }
    at_risk -= removed;
  }
  curve.plateau_level = survivor;

  const LevelStretch stretch = level_stretch(sample);
  curve.level_stretch = stretch.length;
  curve.exceed_count = stretch.exceed_count;
  curve.has_uncensored = stretch.has_uncensored;
  return curve;
}

LevelStretch level_stretch(const KMECurve& curve) {
  return {curve.level_stretch, curve.exceed_count, curve.has_uncensored};
}

LevelStretch level_stretch(const SurvivalSample& sample) {
  if (sample.observations.empty()) throw DomainError("level_stretch: empty sample");
  double top = sample.observations.front().time;
  bool has_uncensored = false;
  double top_uncensored = 0.0;
  for (const auto& obs : sample.observations) {
    top = std::max(top, obs.time);
    if (!obs.censored && (!has_uncensored || obs.time > top_uncensored)) {
      top_uncensored = obs.time;
      has_uncensored = true;
    }
  }
  LevelStretch out;
  out.has_uncensored = has_uncensored;
  if (!has_uncensored) {
    out.length = top;
    out.exceed_count = sample.observations.size();
    return out;
  }
  out.length = top - top_uncensored;
  out.exceed_count = static_cast<std::size_t>(
      std::count_if(sample.observations.begin(), sample.observations.end(),
                    [&](const Observation& o) { return o.censored && o.time > top_uncensored; }));
  return out;
}

}  // namespace cevt
