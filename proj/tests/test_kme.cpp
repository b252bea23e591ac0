#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cevt/censor_sim.hpp"
#include "cevt/kme.hpp"
#include "cevt/random.hpp"

using namespace cevt;
using Catch::Approx;

namespace {

SurvivalSample make_sample(std::vector<double> times, std::vector<bool> censored) {
  return SurvivalSample::from_columns(times, censored);
}

// Small random samples on a coarse grid so that ties occur.
SurvivalSample random_small_sample(RandomStream& rng) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 20.0);
  SurvivalSample s;
  for (std::size_t i = 0; i < n; ++i)
    s.observations.push_back({1.0 + std::floor(rng.uniform() * 8.0), rng.uniform() < 0.45});
  return s;
}

}  // namespace

TEST_CASE("no censoring gives the empirical survivor function", "[kme]") {
  const auto c = fit_kme(make_sample({1, 2, 3}, {false, false, false}));
  CHECK(c.jump_times == std::vector<double>{1, 2, 3});
  CHECK(c.survivor_values[0] == Approx(2.0 / 3.0));
  CHECK(c.survivor_values[1] == Approx(1.0 / 3.0));
  CHECK(c.survivor_values[2] == 0.0);
  CHECK(c.plateau_level == 0.0);
  CHECK(c.level_stretch == 0.0);
}

TEST_CASE("a censored middle time only shrinks the risk set", "[kme]") {
  const auto c = fit_kme(make_sample({1, 2, 3}, {false, true, false}));
  CHECK(c.jump_times == std::vector<double>{1, 3});
  CHECK(c.survivor_values[0] == Approx(2.0 / 3.0));
  CHECK(c.survivor_values[1] == 0.0);
  CHECK(c.plateau_level == 0.0);
}

TEST_CASE("a censored top time leaves a level stretch", "[kme]") {
  const auto c = fit_kme(make_sample({1, 2, 3}, {false, false, true}));
  CHECK(c.survivor_values.size() == 2);
  CHECK(c.plateau_level == Approx(1.0 / 3.0));
  CHECK(c.level_stretch == 1.0);
  CHECK(c.exceed_count == 1);
  CHECK(c.survival_at(2.5) == Approx(1.0 / 3.0));
  CHECK(c.survival_at(0.5) == 1.0);
}

TEST_CASE("level stretch examples", "[kme]") {
  const auto weeks = level_stretch(make_sample({6, 23, 35, 10}, {false, false, true, true}));
  CHECK(weeks.length == 12.0);
  CHECK(weeks.exceed_count == 1);

  const auto all_uncensored = level_stretch(make_sample({4, 8}, {false, false}));
  CHECK(all_uncensored.length == 0.0);
  CHECK(all_uncensored.exceed_count == 0);

  const auto two = level_stretch(make_sample({5, 7, 9}, {false, true, true}));
  CHECK(two.length == 4.0);
  CHECK(two.exceed_count == 2);

  const auto none = level_stretch(make_sample({2, 6}, {true, true}));
  CHECK_FALSE(none.has_uncensored);
  CHECK(none.length == 6.0);
  CHECK(none.exceed_count == 2);
}

TEST_CASE("ties put deaths before censorings", "[kme]") {
  // At t=2 the censored subject is still at risk for the death.
  const auto c = fit_kme(make_sample({1, 2, 2, 3}, {false, true, false, false}));
  CHECK(c.survivor_values[0] == Approx(0.75));
  CHECK(c.survivor_values[1] == Approx(0.75 * (1.0 - 1.0 / 3.0)));
  CHECK(c.survivor_values[2] == 0.0);
}

TEST_CASE("KME properties on random samples", "[kme][property]") {
  for (std::uint64_t k = 0; k < 500; ++k) {
    RandomStream rng(2024, k);
    const auto sample = random_small_sample(rng);
    const auto c = fit_kme(sample);
    const auto stats = extreme_stats(sample, std::nullopt);

    double previous = 1.0;
    for (std::size_t i = 0; i < c.survivor_values.size(); ++i) {
      CHECK(c.survivor_values[i] <= previous);
      CHECK(c.survivor_values[i] >= 0.0);
      if (i > 0) CHECK(c.jump_times[i] > c.jump_times[i - 1]);
      previous = c.survivor_values[i];
    }
    // Jumps only at uncensored times.
    for (double t : c.jump_times)
      CHECK(std::any_of(sample.observations.begin(), sample.observations.end(),
                        [&](const Observation& o) { return o.time == t && !o.censored; }));
    // Positive plateau iff some subject at the largest time is censored (ties included).
    const bool censored_at_top = std::any_of(sample.observations.begin(), sample.observations.end(),
                                             [&](const Observation& o) { return o.censored && o.time == stats.max_overall; });
    CHECK((c.plateau_level > 0.0) == censored_at_top);

    // Plateau as an independent log-space product over distinct death times.
    std::map<double, std::pair<int, int>> by_time;  // deaths, removals
    for (const auto& o : sample.observations) {
      auto& e = by_time[o.time];
      e.first += o.censored ? 0 : 1;
      e.second += 1;
    }
    double log_plateau = 0.0;
    bool zero = false;
    int at_risk = static_cast<int>(sample.size());
    for (const auto& [t, e] : by_time) {
      if (e.first == at_risk) zero = true;
      else if (e.first > 0) log_plateau += std::log1p(-static_cast<double>(e.first) / at_risk);
      at_risk -= e.second;
    }
    if (zero)
      CHECK(c.plateau_level == 0.0);
    else
      CHECK(c.plateau_level == Approx(std::exp(log_plateau)).epsilon(1e-12));

    // Agreement with the extreme statistics.
    CHECK(c.exceed_count == stats.censored_exceedances);
    CHECK(c.level_stretch == stats.level_stretch().value_or(stats.max_overall));
  }
}
