#include "cevt/censor_sim.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "cevt/errors.hpp"
#include "cevt/numerics.hpp"

namespace cevt {

SurvivalSample SurvivalSample::from_columns(std::span<const double> times, const std::vector<bool>& censored) {
  if (times.size() != censored.size()) throw std::invalid_argument("times and censor indicators differ in length");
  SurvivalSample sample;
  sample.observations.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) sample.observations.push_back({times[i], censored[i]});
  return sample;
}

SurvivalSample draw_sample(const CensoringSetup& setup, std::size_t n, RandomStream& rng) {
  if (n < 1) throw DomainError("draw_sample: n must be at least 1");
  const bool has_immunes = setup.cure_fraction < 1.0;
  SurvivalSample sample;
  sample.observations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool susceptible = !has_immunes || rng.uniform() < setup.cure_fraction;
    const double lifetime = susceptible ? setup.lifetime.sample(rng) : numerics::kInf;
    const double censor_time = setup.censoring.sample(rng);
    // Ties count as uncensored (T* <= U).
    const bool censored = lifetime > censor_time;
    sample.observations.push_back({censored ? censor_time : lifetime, censored});
  }
  return sample;
}

DecoupageSplit decoupage_split(const SurvivalSample& sample) {
  DecoupageSplit split;
  for (const auto& obs : sample.observations) (obs.censored ? split.censored : split.uncensored).push_back(obs.time);
  return split;
}

ExtremeStats extreme_stats(const SurvivalSample& sample, const std::optional<NormingConstants>& norming) {
  if (sample.observations.empty()) throw std::invalid_argument("extreme_stats: empty sample");
  ExtremeStats s;
  for (const auto& obs : sample.observations) {
    auto& slot = obs.censored ? s.max_censored : s.max_uncensored;
    if (!slot || obs.time > *slot) slot = obs.time;
    ++(obs.censored ? s.n_censored : s.n_uncensored);
  }
  if (s.max_uncensored && s.max_censored)
    s.max_overall = std::max(*s.max_uncensored, *s.max_censored);
  else
    s.max_overall = s.max_uncensored ? *s.max_uncensored : *s.max_censored;

  if (!s.max_uncensored) {
    s.censored_exceedances = s.n_censored;
    return s;
  }
  const double mu = *s.max_uncensored;
  for (const auto& obs : sample.observations)
    if (obs.censored && obs.time > mu) ++s.censored_exceedances;

  const double stretch = s.max_overall - mu;
  if (norming) s.norm_l = stretch / norming->a_n;
  if (s.max_overall != 0.0) s.norm_r = stretch / s.max_overall;
  return s;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("CEVT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

ReplicationResult run_replications(const CensoringSetup& setup, std::size_t n, std::size_t rep_count,
                                   std::uint64_t master_seed, const ReplicationOptions& options) {
  if (rep_count < 1) throw DomainError("run_replications: rep_count must be at least 1");
  if (n < 1) throw DomainError("run_replications: n must be at least 1");

  ReplicationResult result;
  result.setup_summary = setup.describe();
  result.n = n;
  result.rep_count = rep_count;
  result.master_seed = master_seed;
  if (options.with_norming) result.norming = norming_constants(setup, n);
  result.stats.resize(rep_count);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(master_seed, r);
      result.stats[r] = extreme_stats(draw_sample(setup, n, rng), result.norming);
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(options.threads ? options.threads : default_thread_count(), rep_count));
  if (threads <= 1) {
    run_range(0, rep_count);
  } else {
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> workers;
      const std::size_t chunk = (rep_count + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(rep_count, begin + chunk);
        if (begin >= end) continue;
        workers.emplace_back([&, t, begin, end] {
          try {
            run_range(begin, end);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }

  result.absent_uncensored = static_cast<std::size_t>(
      std::count_if(result.stats.begin(), result.stats.end(), [](const ExtremeStats& s) { return !s.max_uncensored; }));
  return result;
}

}  // namespace cevt
