#include "cevt/presets.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include "cevt/analysis.hpp"
#include "cevt/censor_sim.hpp"
#include "cevt/errors.hpp"
#include "cevt/evt_limits.hpp"
#include "cevt/kme.hpp"
#include "cevt/random.hpp"

namespace cevt {

namespace {

constexpr std::size_t kAcceptanceN = 10000;
constexpr std::size_t kAcceptanceReps = 5000;
constexpr std::size_t kNpReps = 2000;
constexpr std::size_t kDegeneracyReps = 2000;
constexpr std::size_t kRatioDraws = 10000000;
constexpr std::size_t kChunk = 1 << 16;

const std::vector<std::string> kBasePresets{"exp-kappa1",      "exp-kappa2", "ratio-law",          "poisson-mixture",
                                            "norming",         "tail-asymptotics", "converse", "kappa0-degeneracy",
                                            "kme-oracle"};

const std::map<std::string, std::vector<std::string>>& check_table() {
  static const std::map<std::string, std::vector<std::string>> table{
      {"exp-kappa1", {"atom-fraction", "l-law-ks", "count-tv", "kappa-hat", "np-limit-ks"}},
      {"exp-kappa2", {"kappa2-count-tv", "kappa2-count-mean"}},
      {"ratio-law", {"ratio-law-vs-ratio-mc", "ratio-law-vs-event-mc"}},
      {"poisson-mixture", {"poisson-mixture-identity"}},
      {"norming", {"norming-closed-form"}},
      {"tail-asymptotics", {"uncensored-ratio-exp", "fubini-residual", "kappa0-censored-decrease"}},
      {"converse", {"converse-exp-kappa2"}},
      {"kappa0-degeneracy", {"kappa0-atom-trend"}},
      {"kme-oracle", {"kme-extreme-stats-agreement", "kme-fixtures"}},
  };
  return table;
}

unsigned resolve_threads(unsigned threads) { return threads == 0 ? default_thread_count() : threads; }

/// Runs body(i) for i in [0, count) on `threads` workers; each index is handled once.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w)
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += threads) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

class Checks {
 public:
  explicit Checks(const PresetContext& context) : context_(context) {}

  double threshold(const std::string& name, double fallback) const {
    const auto it = context_.tolerances.find(name);
    return it == context_.tolerances.end() ? fallback : it->second;
  }

  void add(const std::string& name, const std::string& statistic, double observed, double fallback,
           std::size_t sample_size, std::string detail = {}) {
    const double thr = threshold(name, fallback);
    rows.push_back({name, statistic, observed, thr, sample_size, observed <= thr, std::move(detail)});
  }

  void add(const std::string& name, const FitReport& report, std::string detail = {}) {
    const double thr = threshold(name, report.threshold);
    std::string d = std::move(detail);
    if (report.dropped > 0) d += (d.empty() ? "" : "; ") + std::string("dropped=") + std::to_string(report.dropped);
    rows.push_back({name, std::string(statistic_name(report.kind)), report.observed, thr, report.sample_size,
                    report.observed <= thr, d});
  }

  const PresetContext& context() const { return context_; }
  std::vector<CheckRow> rows;

 private:
  const PresetContext& context_;
};

ReplicationOptions options(const PresetContext& c, bool with_norming = true) {
  ReplicationOptions o;
  o.with_norming = with_norming;
  o.threads = c.threads;
  return o;
}

double top_uncensored_fraction(const ReplicationResult& r) {
  const auto hits = std::count_if(r.stats.begin(), r.stats.end(), [](const ExtremeStats& s) { return s.top_is_uncensored(); });
  return static_cast<double>(hits) / static_cast<double>(r.stats.size());
}

double count_mean(const ReplicationResult& r) { return estimate_kappa(r); }

void exp_kappa1(Checks& checks) {
  const auto& c = checks.context();
  const auto setup = CensoringSetup::make(DistributionModel::exponential(1.0), DistributionModel::exponential(1.0));
  const auto run = run_replications(setup, kAcceptanceN, kAcceptanceReps, c.seed, options(c));
  const double frac = top_uncensored_fraction(run);
  checks.add("atom-fraction", "abs-dev", std::abs(frac - 0.5), 0.025, run.stats.size(),
             "fraction=" + format_double(frac) + "; target=0.5");
  checks.add("l-law-ks", ks_against_l_law(run, 1.0, 0.05));
  checks.add("count-tv", fit_count_law(run, 1.0, 0.05));
  const double kappa_hat = estimate_kappa(run);
  checks.add("kappa-hat", "abs-dev", std::abs(kappa_hat - 1.0), 0.1, run.stats.size() - run.absent_uncensored,
             "kappa_hat=" + format_double(kappa_hat));
  const auto np_run = run_replications(setup, kAcceptanceN, kNpReps, c.seed + 1, options(c, false));
  checks.add("np-limit-ks", check_np_limit(np_run, setup, 0.05), "mean=" + format_double(setup.kappa.value() / setup.p_c));
}

void exp_kappa2(Checks& checks) {
  const auto& c = checks.context();
  const auto setup = CensoringSetup::make(DistributionModel::exponential(1.0), DistributionModel::exponential(2.0));
  const auto run = run_replications(setup, kAcceptanceN, kAcceptanceReps, c.seed + 2, options(c, false));
  checks.add("kappa2-count-tv", fit_count_law(run, 2.0, 0.05));
  const double mean = count_mean(run);
  checks.add("kappa2-count-mean", "abs-dev", std::abs(mean - 2.0), 0.15, run.stats.size() - run.absent_uncensored,
             "mean=" + format_double(mean) + "; target=2");
}

void ratio_law(Checks& checks) {
  const auto& c = checks.context();
  std::vector<double> xs;
  for (int i = 1; i <= 9; ++i) xs.push_back(0.1 * i);
  double ratio_dev = 0.0;
  double event_dev = 0.0;
  std::string ratio_detail;
  const std::vector<double> kappas{0.5, 1.0, 2.0};
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    const auto mc = ratio_law_monte_carlo(kappas[k], xs, kRatioDraws, c.seed + 10 + k, c.threads);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double q = r_law_tail(kappas[k], xs[i]);
      const double dr = std::abs(q - mc.ratio_tail[i]);
      if (dr > ratio_dev) {
        ratio_dev = dr;
        ratio_detail = "worst kappa=" + format_double(kappas[k]) + " x=" + format_double(xs[i]) +
                       ": quadrature=" + format_double(q) + " mc=" + format_double(mc.ratio_tail[i]);
      }
      event_dev = std::max(event_dev, std::abs(q - mc.event_tail[i]));
    }
  }
  checks.add("ratio-law-vs-ratio-mc", "max-abs-dev", ratio_dev, 0.002, kappas.size() * kRatioDraws, ratio_detail);
  checks.add("ratio-law-vs-event-mc", "max-abs-dev", event_dev, 0.002, kappas.size() * kRatioDraws,
             "oracle: P[(1-x) Y_c > Y_u]");
}

void poisson_mixture(Checks& checks) {
  double dev = 0.0;
  std::size_t m = 0;
  for (double kappa : {0.25, 1.0, 4.0})
    for (std::size_t j = 0; j <= 10; ++j, ++m)
      dev = std::max(dev, std::abs(poisson_mixture_pmf(kappa, j) - count_law_pmf(kappa, j)));
  checks.add("poisson-mixture-identity", "max-abs-dev", dev, 1e-8, m);
}

void norming(Checks& checks) {
  struct Case {
    DistributionModel f, g;
    double shape, rate_sum;
  };
  const std::vector<Case> cases{
      {DistributionModel::exponential(1.0), DistributionModel::exponential(1.0), 1.0, 2.0},
      {DistributionModel::exponential(1.0), DistributionModel::exponential(2.0), 1.0, 3.0},
      {DistributionModel::weibull(2.0, 1.0), DistributionModel::weibull(2.0, 3.0), 2.0, 4.0},
      {DistributionModel::weibull(3.0, 1.0), DistributionModel::weibull(3.0, 1.0), 3.0, 2.0},
  };
  double worst = 0.0;
  std::size_t m = 0;
  for (const auto& cs : cases) {
    const auto setup = CensoringSetup::make(cs.f, cs.g);
    for (std::size_t n : {std::size_t{100}, std::size_t{10000}, std::size_t{1000000}}) {
      const auto nc = norming_constants(setup, n);
      const double b = std::pow(std::log(static_cast<double>(n)) / cs.rate_sum, 1.0 / cs.shape);
      const double a = 1.0 / (cs.rate_sum * cs.shape * std::pow(b, cs.shape - 1.0));
      worst = std::max({worst, std::abs(nc.b_n - b) / b, std::abs(nc.a_n - a) / a});
      m += 2;
    }
  }
  checks.add("norming-closed-form", "max-rel-err", worst, 1e-10, m);
}

std::size_t strict_decrease_violations(const std::vector<double>& v) {
  std::size_t bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) ++bad;
  return bad;
}

void tail_asymptotics(Checks& checks) {
  using D = DistributionModel;
  const std::vector<std::pair<D, D>> exp_pairs{{D::exponential(1.0), D::exponential(1.0)},
                                              {D::exponential(1.0), D::exponential(2.0)},
                                              {D::exponential(2.0), D::exponential(0.5)}};
  const std::vector<std::pair<D, D>> other_pairs{{D::weibull(2.0, 1.0), D::weibull(2.0, 3.0)},
                                                {D::lognormal(1.0), D::lognormal(2.0)},
                                                {D::normal_tail(1.0), D::normal_tail(1.5)}};
  double uncensored_dev = 0.0;
  double fubini = 0.0;
  std::size_t m_exp = 0;
  std::size_t m_all = 0;
  for (const auto& [f, g] : exp_pairs) {
    const auto setup = CensoringSetup::make(f, g);
    const auto grid = default_tail_grid(setup);
    const auto report = check_tail_asymptotics(setup, grid);
    for (double d : report.uncensored.discrepancies) uncensored_dev = std::max(uncensored_dev, d);
    for (double r : report.fubini_residuals) fubini = std::max(fubini, r);
    m_exp += grid.size();
    m_all += grid.size();
  }
  for (const auto& [f, g] : other_pairs) {
    const auto setup = CensoringSetup::make(f, g);
    const auto grid = default_tail_grid(setup);
    const auto report = check_tail_asymptotics(setup, grid);
    for (double r : report.fubini_residuals) fubini = std::max(fubini, r);
    m_all += grid.size();
  }
  checks.add("uncensored-ratio-exp", "max-abs-dev", uncensored_dev, 1e-9, m_exp);
  checks.add("fubini-residual", "max-abs-dev", fubini, 1e-9, m_all);

  const auto zero = CensoringSetup::make(D::weibull(2.0, 1.0), D::weibull(1.0, 1.0));
  const auto grid = default_tail_grid(zero);
  const auto report = check_tail_asymptotics(zero, grid);
  std::string detail = "censored ratios:";
  for (double v : report.censored.values) detail += " " + format_double(v);
  checks.add("kappa0-censored-decrease", "violations",
             static_cast<double>(strict_decrease_violations(report.censored.values)), 0.0, grid.size(), detail);
}

void converse(Checks& checks) {
  const auto setup = CensoringSetup::make(DistributionModel::exponential(1.0), DistributionModel::exponential(2.0));
  const auto report = check_converse(setup, default_tail_grid(setup));
  checks.add("converse-exp-kappa2", "abs-dev", report.final_discrepancy, 1e-6, report.grid.size(),
             "k=" + format_double(report.k_estimates.back()));
}

void degeneracy_trend(Checks& checks, const CensoringSetup& setup, const std::vector<std::size_t>& sizes,
                      std::size_t reps, std::uint64_t seed) {
  const auto& c = checks.context();
  std::vector<double> fractions;
  std::string detail = "fraction M=M_u:";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto run = run_replications(setup, sizes[i], reps, seed + i, options(c, false));
    fractions.push_back(top_uncensored_fraction(run));
    detail += " n=" + std::to_string(sizes[i]) + ":" + format_double(fractions.back());
  }
  std::size_t bad = 0;
  for (std::size_t i = 1; i < fractions.size(); ++i)
    if (!(fractions[i] > fractions[i - 1])) ++bad;
  checks.add("kappa0-atom-trend", "violations", static_cast<double>(bad), 0.0, reps * sizes.size(), detail);
}

void kappa0_degeneracy(Checks& checks) {
  const auto setup = CensoringSetup::make(DistributionModel::weibull(2.0, 1.0), DistributionModel::weibull(1.0, 1.0));
  degeneracy_trend(checks, setup, {100, 1000, 10000}, kDegeneracyReps, checks.context().seed + 20);
}

void kme_oracle(Checks& checks) {
  std::size_t mismatches = 0;
  constexpr std::size_t kSamples = 1000;
  for (std::size_t s = 0; s < kSamples; ++s) {
    RandomStream rng(checks.context().seed, 1000000 + s);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 20.0);
    SurvivalSample sample;
    for (std::size_t i = 0; i < n; ++i) {
      // One decimal place, so ties between censored and uncensored times occur.
      const double t = std::round(10.0 * rng.standard_exponential()) / 10.0 + 0.1;
      sample.observations.push_back({t, rng.uniform() < 0.4});
    }
    const auto stretch = level_stretch(fit_kme(sample));
    const auto stats = extreme_stats(sample, std::nullopt);
    const bool same_flag = stretch.has_uncensored == stats.max_uncensored.has_value();
    const double expected_length = stats.level_stretch().value_or(stats.max_overall);
    if (!same_flag || stretch.length != expected_length || stretch.exceed_count != stats.censored_exceedances)
      ++mismatches;
  }
  checks.add("kme-extreme-stats-agreement", "mismatches", static_cast<double>(mismatches), 0.0, kSamples);

  struct Fixture {
    std::vector<double> times;
    std::vector<bool> censored;
    std::vector<double> survivor;
    double plateau, stretch;
  };
  // Product-limit factors written out by hand: (1 - d/r) at each uncensored time.
  const double s1 = 1.0 - 1.0 / 3.0;
  const double s2 = s1 * (1.0 - 1.0 / 2.0);
  const std::vector<Fixture> fixtures{
      {{1, 2, 3}, {false, false, false}, {s1, s2, 0.0}, 0.0, 0.0},
      {{1, 2, 3}, {false, true, false}, {s1, 0.0}, 0.0, 0.0},
      {{1, 2, 3}, {false, false, true}, {s1, s2}, s2, 1.0},
  };
  std::size_t bad = 0;
  for (const auto& fx : fixtures) {
    const auto curve = fit_kme(SurvivalSample::from_columns(fx.times, fx.censored));
    if (curve.survivor_values != fx.survivor || curve.plateau_level != fx.plateau || curve.level_stretch != fx.stretch)
      ++bad;
  }
  checks.add("kme-fixtures", "mismatches", static_cast<double>(bad), 0.0, fixtures.size());
}

void run_named(const std::string& name, Checks& checks) {
  if (name == "exp-kappa1") return exp_kappa1(checks);
  if (name == "exp-kappa2") return exp_kappa2(checks);
  if (name == "ratio-law") return ratio_law(checks);
  if (name == "poisson-mixture") return poisson_mixture(checks);
  if (name == "norming") return norming(checks);
  if (name == "tail-asymptotics") return tail_asymptotics(checks);
  if (name == "converse") return converse(checks);
  if (name == "kappa0-degeneracy") return kappa0_degeneracy(checks);
  if (name == "kme-oracle") return kme_oracle(checks);
  throw UsageError("unknown preset '" + name + "'");
}

}  // namespace

std::vector<std::string> preset_names() {
  auto names = kBasePresets;
  names.push_back("all-fast");
  return names;
}

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> preset_check_names(const std::string& preset) {
  if (preset == "all-fast") {
    std::vector<std::string> all;
    for (const auto& p : kBasePresets) {
      const auto& names = check_table().at(p);
      all.insert(all.end(), names.begin(), names.end());
    }
    return all;
  }
  const auto it = check_table().find(preset);
  if (it == check_table().end()) throw UsageError("unknown preset '" + preset + "'");
  return it->second;
}

std::vector<std::string> custom_check_names(double kappa) {
  if (kappa == 0.0) return {"kappa0-atom-trend"};
  return {"atom-fraction", "l-law-ks", "count-tv", "kappa-hat", "np-limit-ks"};
}

std::vector<CheckRow> run_preset(const std::string& name, const PresetContext& context) {
  Checks checks(context);
  if (name == "all-fast") {
    for (const auto& p : kBasePresets) run_named(p, checks);
  } else {
    run_named(name, checks);
  }
  return checks.rows;
}

std::vector<CheckRow> run_custom_verify(const CensoringSetup& setup, std::size_t n, std::size_t reps,
                                        const PresetContext& context) {
  if (!setup.proper()) throw DomainError("verify: requires cure fraction 1");
  if (!setup.kappa || !std::isfinite(*setup.kappa)) throw DomainError("verify: requires a finite kappa");
  const double kappa = *setup.kappa;
  Checks checks(context);
  if (kappa == 0.0) {
    std::vector<std::size_t> sizes{std::max<std::size_t>(n / 100, 2), std::max<std::size_t>(n / 10, 2), n};
    degeneracy_trend(checks, setup, sizes, reps, context.seed);
    return checks.rows;
  }
  const auto run = run_replications(setup, n, reps, context.seed, options(context));
  const double frac = top_uncensored_fraction(run);
  const double atom = 1.0 / (1.0 + kappa);
  checks.add("atom-fraction", "abs-dev", std::abs(frac - atom), 0.025, run.stats.size(),
             "fraction=" + format_double(frac) + "; target=" + format_double(atom));
  checks.add("l-law-ks", ks_against_l_law(run, kappa));
  checks.add("count-tv", fit_count_law(run, kappa));
  const double kappa_hat = estimate_kappa(run);
  checks.add("kappa-hat", "abs-dev", std::abs(kappa_hat - kappa), 0.1 * std::max(1.0, kappa),
             run.stats.size() - run.absent_uncensored, "kappa_hat=" + format_double(kappa_hat));
  checks.add("np-limit-ks", check_np_limit(run, setup));
  return checks.rows;
}

RatioLawMonteCarlo ratio_law_monte_carlo(double kappa, const std::vector<double>& x, std::size_t draws,
                                         std::uint64_t seed, unsigned threads) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("ratio_law_monte_carlo: kappa must lie in (0, inf)");
  const double shift_u = -std::log1p(kappa);
  const double shift_c = std::log(kappa) - std::log1p(kappa);
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  const std::size_t k = x.size();
  std::vector<std::size_t> ratio_hits(chunks * k, 0);
  std::vector<std::size_t> event_hits(chunks * k, 0);
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    RandomStream rng(seed, chunk);
    const std::size_t begin = chunk * kChunk;
    const std::size_t end = std::min(draws, begin + kChunk);
    std::size_t* ratio = ratio_hits.data() + chunk * k;
    std::size_t* event = event_hits.data() + chunk * k;
    for (std::size_t d = begin; d < end; ++d) {
      const double yu = rng.standard_gumbel() + shift_u;
      const double yc = rng.standard_gumbel() + shift_c;
      const double top = std::max(yu, yc);
      for (std::size_t i = 0; i < k; ++i) {
        if (top > 0.0 && top - yu > x[i] * top) ++ratio[i];
        if ((1.0 - x[i]) * yc > yu) ++event[i];
      }
    }
  });
  RatioLawMonteCarlo out;
  out.kappa = kappa;
  out.x = x;
  out.draws = draws;
  out.ratio_tail.assign(k, 0.0);
  out.event_tail.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t r = 0, e = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      r += ratio_hits[c * k + i];
      e += event_hits[c * k + i];
    }
    out.ratio_tail[i] = static_cast<double>(r) / static_cast<double>(draws);
    out.event_tail[i] = static_cast<double>(e) / static_cast<double>(draws);
  }
  return out;
}

}  // namespace cevt
