#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cevt/dist_models.hpp"
#include "cevt/evt_limits.hpp"
#include "cevt/random.hpp"

namespace cevt {

/// One observed pair: time = min(T*, U), censored = (T* > U).
struct Observation {
  double time = 0.0;
  bool censored = false;
};

/// Right-censored sample. Immune individuals have T* = +inf and are therefore always
/// censored at their censoring time.
struct SurvivalSample {
  std::vector<Observation> observations;

  std::size_t size() const { return observations.size(); }
  static SurvivalSample from_columns(std::span<const double> times, const std::vector<bool>& censored);
};

/// T* from F with probability p (immune, +inf, otherwise) and U from G, independently.
SurvivalSample draw_sample(const CensoringSetup& setup, std::size_t n, RandomStream& rng);

struct DecoupageSplit {
  std::vector<double> uncensored;
  std::vector<double> censored;
};

/// Order-preserving partition of the times by the censor indicator.
DecoupageSplit decoupage_split(const SurvivalSample& sample);

struct ExtremeStats {
  std::optional<double> max_uncensored;  // M_u, absent when N_u = 0
  std::optional<double> max_censored;    // M_c, absent when N_c = 0
  double max_overall = 0.0;              // M
  std::size_t n_uncensored = 0;
  std::size_t n_censored = 0;
  /// Censored times strictly above M_u; equals N_c when M_u is absent.
  std::size_t censored_exceedances = 0;
  /// (M - M_u) / a_n; needs norming constants and M_u.
  std::optional<double> norm_l;
  /// (M - M_u) / M; needs M_u and M != 0.
  std::optional<double> norm_r;

  std::optional<double> level_stretch() const {
    if (!max_uncensored) return std::nullopt;
    return max_overall - *max_uncensored;
  }
  bool top_is_uncensored() const { return max_uncensored && *max_uncensored == max_overall; }
};

/// Throws std::invalid_argument for an empty sample.
ExtremeStats extreme_stats(const SurvivalSample& sample, const std::optional<NormingConstants>& norming);

struct ReplicationResult {
  std::string setup_summary;
  std::size_t n = 0;
  std::size_t rep_count = 0;
  std::uint64_t master_seed = 0;
  std::optional<NormingConstants> norming;
  std::vector<ExtremeStats> stats;
  /// Replications without any uncensored observation.
  std::size_t absent_uncensored = 0;
};

struct ReplicationOptions {
  /// Compute NormingConstants once and fill norm_l. Requires cure fraction 1.
  bool with_norming = true;
  /// 0 picks the CEVT_THREADS environment variable, else 1.
  unsigned threads = 0;
};

/// Replication r draws from RandomStream(master_seed, r), so the output does not
/// depend on the thread count.
ReplicationResult run_replications(const CensoringSetup& setup, std::size_t n, std::size_t rep_count,
                                   std::uint64_t master_seed, const ReplicationOptions& options = {});

/// Thread count from CEVT_THREADS, or 1.
unsigned default_thread_count();

}  // namespace cevt
