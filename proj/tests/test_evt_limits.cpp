#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cevt/errors.hpp"
#include "cevt/evt_limits.hpp"
#include "cevt/numerics.hpp"

using namespace cevt;
using Catch::Approx;
using D = DistributionModel;

TEST_CASE("L-law cdf, tail and atom", "[limits]") {
  CHECK(l_law_cdf(1.0, 0.0) == 0.5);
  CHECK(l_law_cdf(3.0, 0.0) == 0.25);
  CHECK(l_law_cdf(1.0, std::log(3.0)) == Approx(0.75).epsilon(1e-15));
  CHECK(l_law_tail(2.0, 1.0) == Approx(2.0 / (std::exp(1.0) + 2.0)).epsilon(1e-15));
  CHECK(l_law_cdf(0.0, 0.0) == 1.0);
  CHECK_THROWS_AS(l_law_cdf(1.0, -0.1), DomainError);
  for (double x = 0.0; x < 20.0; x += 0.37) CHECK(l_law_cdf(1.7, x) + l_law_tail(1.7, x) == Approx(1.0));
}

TEST_CASE("count law is geometric with mean kappa", "[limits]") {
  CHECK(count_law_pmf(1.0, 0) == 0.5);
  CHECK(count_law_pmf(1.0, 1) == 0.25);
  CHECK(count_law_pmf(2.0, 0) == Approx(1.0 / 3.0));
  for (double kappa : {0.25, 1.0, 4.0}) {
    double total = 0.0, mean = 0.0;
    for (std::size_t j = 0; j < 2000; ++j) {
      total += count_law_pmf(kappa, j);
      mean += static_cast<double>(j) * count_law_pmf(kappa, j);
    }
    CHECK(total == Approx(1.0).epsilon(1e-13));
    CHECK(mean == Approx(kappa).epsilon(1e-11));
  }
}

TEST_CASE("Poisson mixture equals the geometric law", "[limits]") {
  for (double kappa : {0.25, 1.0, 4.0})
    for (std::size_t j = 0; j <= 10; ++j) {
      INFO("kappa " << kappa << " j " << j);
      CHECK(std::abs(poisson_mixture_pmf(kappa, j) - count_law_pmf(kappa, j)) <= 1e-8);
    }
}

TEST_CASE("ratio-law integral against high-precision quadrature", "[limits]") {
  // 30-digit reference values of the closed integral.
  struct Row {
    double kappa, x, value;
  };
  const std::vector<Row> rows{{0.5, 0.3, 0.37127191575636535}, {1.0, 0.1, 0.51108424458777789},
                              {1.0, 0.5, 0.56181777177315383}, {2.0, 0.9, 0.719324189239035},
                              {2.0, 0.5, 0.70849306770315452}, {0.25, 0.7, 0.33604938141188269}};
  for (const auto& r : rows) {
    INFO("kappa " << r.kappa << " x " << r.x);
    CHECK(std::abs(r_law_tail(r.kappa, r.x) - r.value) <= 1e-8);
  }
}

TEST_CASE("ratio-law integral endpoints and range", "[limits][property]") {
  for (double kappa : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    INFO("kappa " << kappa);
    const double low = kappa / (1.0 + kappa);
    CHECK(r_law_tail(kappa, 1e-7) == Approx(low).epsilon(1e-5));
    CHECK(r_law_tail(kappa, 1.0 - 1e-7) == Approx(std::exp(-1.0 / (1.0 + kappa))).epsilon(1e-5));
    for (double x = 0.05; x < 1.0; x += 0.05) {
      const double v = r_law_tail(kappa, x);
      CHECK(v > low);
      CHECK(v < 1.0);
    }
  }
  // Increasing in x for small kappa; for larger kappa it peaks inside (0, 1).
  for (double kappa : {0.1, 0.5, 1.0}) {
    double previous = r_law_tail(kappa, 0.01);
    for (double x = 0.05; x < 1.0; x += 0.05) {
      const double v = r_law_tail(kappa, x);
      CHECK(v > previous);
      previous = v;
    }
  }
  CHECK(r_law_tail(2.0, 0.99) < r_law_tail(2.0, 0.9));
  CHECK_THROWS_AS(r_law_tail(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(r_law_tail(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(r_law_tail(0.0, 0.5), DomainError);
}

TEST_CASE("Gumbel extremal-process marginal", "[limits]") {
  CHECK(gumbel_marginal_cdf(1.0, 0.0) == Approx(std::exp(-1.0)));
  CHECK(gumbel_marginal_cdf(2.0, std::log(2.0)) == Approx(std::exp(-1.0)));
  // Max-stability: Lambda^t(x) = Lambda(x - log t).
  for (double t : {0.3, 1.0, 5.0})
    for (double x : {-1.0, 0.0, 2.5}) CHECK(gumbel_marginal_cdf(t, x) == Approx(gumbel_marginal_cdf(1.0, x - std::log(t))));
}

TEST_CASE("limit-law values", "[limits]") {
  CHECK_THROWS_AS(LimitLaw::l_law(numerics::kInf), DomainError);
  CHECK_THROWS_AS(LimitLaw::geometric_count(-1.0), DomainError);
  CHECK_THROWS_AS(LimitLaw::r_law(std::nan("")), DomainError);

  const auto l = LimitLaw::l_law(1.0);
  CHECK(l.quantile(0.3) == 0.0);
  CHECK(l.cdf(l.quantile(0.8)) == Approx(0.8));
  CHECK_THROWS_AS(LimitLaw::r_law(1.0).quantile(0.5), DomainError);

  const auto geom = LimitLaw::geometric_count(2.0);
  CHECK(geom.pmf(3) == Approx(count_law_pmf(2.0, 3)));
  CHECK(geom.cdf(0.0) == Approx(1.0 / 3.0));
  CHECK(geom.quantile(0.5) == 1.0);
}

TEST_CASE("limit-law samplers follow their cdf", "[limits][property]") {
  const std::vector<LimitLaw> laws{LimitLaw::l_law(0.5), LimitLaw::l_law(3.0), LimitLaw::geometric_count(1.0),
                                   LimitLaw::gumbel_marginal(0.5)};
  for (const auto& law : laws) {
    RandomStream rng(11, 3);
    constexpr int draws = 50000;
    for (double x : {0.0, 0.5, 2.0}) {
      RandomStream r(rng.seed(), 3);
      int below = 0;
      for (int i = 0; i < draws; ++i) below += law.sample(r) <= x;
      CHECK(static_cast<double>(below) / draws == Approx(law.cdf(x)).margin(0.01));
    }
  }
}

TEST_CASE("norming constants match closed forms", "[limits]") {
  for (std::size_t n : {std::size_t{100}, std::size_t{10000}, std::size_t{1000000}}) {
    const auto e = norming_constants(CensoringSetup::make(D::exponential(1.0), D::exponential(1.0)), n);
    CHECK(e.b_n == Approx(std::log(static_cast<double>(n)) / 2.0).epsilon(1e-10));
    CHECK(e.a_n == Approx(0.5).epsilon(1e-10));
    const auto w = norming_constants(CensoringSetup::make(D::weibull(2.0, 1.0), D::weibull(2.0, 3.0)), n);
    const double b = std::sqrt(std::log(static_cast<double>(n)) / 4.0);
    CHECK(w.b_n == Approx(b).epsilon(1e-10));
    CHECK(w.a_n == Approx(1.0 / (8.0 * b)).epsilon(1e-10));
  }
  // Reference from 30-digit root finding.
  const auto ln = norming_constants(CensoringSetup::make(D::lognormal(1.0), D::lognormal(2.0)), 10000);
  CHECK(ln.b_n == Approx(19.601795138187331).epsilon(1e-10));
  CHECK(ln.a_n == Approx(4.6399088907208603).epsilon(1e-9));

  CHECK_THROWS_AS(norming_constants(CensoringSetup::make(D::exponential(1.0), D::exponential(1.0), 0.5), 100),
                  DomainError);
  CHECK_THROWS_AS(norming_constants(CensoringSetup::make(D::exponential(1.0), D::exponential(1.0)), 1), DomainError);
}

TEST_CASE("success probability", "[limits]") {
  const auto e = CensoringSetup::make(D::exponential(1.0), D::exponential(1.0));
  for (double t : {0.5, 2.0, 7.0}) CHECK(success_prob(e, t) == Approx(std::exp(-2.0 * t)).epsilon(1e-11));
  CHECK(success_prob(e, 0.0) == 1.0);
  const auto w = CensoringSetup::make(D::weibull(2.0, 1.0), D::weibull(1.0, 1.0));
  CHECK(success_prob(w, 1.5) == Approx(0.0097554406445457639).epsilon(1e-10));
}

TEST_CASE("tail asymptotics", "[limits]") {
  const auto e = CensoringSetup::make(D::exponential(1.0), D::exponential(2.0));
  const auto grid = default_tail_grid(e);
  REQUIRE(grid.size() == 4);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(e.joint_tail(grid[i]) == Approx(std::pow(10.0, -2.0 * static_cast<double>(i + 1))).epsilon(1e-9));
  const auto report = check_tail_asymptotics(e, grid);
  for (double v : report.uncensored.values) CHECK(std::abs(v - 1.0 / 3.0) <= 1e-9);
  for (double r : report.fubini_residuals) CHECK(r <= 1e-9);

  const auto zero = CensoringSetup::make(D::weibull(2.0, 1.0), D::weibull(1.0, 1.0));
  const auto z = check_tail_asymptotics(zero, default_tail_grid(zero));
  CHECK(z.censored.monotone);
  CHECK(z.censored.values.back() < z.censored.values.front());

  const auto ln = CensoringSetup::make(D::lognormal(1.0), D::lognormal(2.0));
  const auto l = check_tail_asymptotics(ln, default_tail_grid(ln));
  for (double r : l.fubini_residuals) CHECK(r <= 1e-9);
  // Slow convergence towards 1/(1+kappa) = 0.8 for lognormals, but in the right direction.
  CHECK(l.uncensored.monotone);
}

TEST_CASE("partial converse recovers kappa", "[limits]") {
  const auto e = CensoringSetup::make(D::exponential(1.0), D::exponential(2.0));
  const auto report = check_converse(e, default_tail_grid(e));
  CHECK(std::abs((1.0 - report.k_estimates.back()) / report.k_estimates.back() - 2.0) <= 1e-6);
  CHECK(report.final_discrepancy <= 1e-6);

  const auto w = CensoringSetup::make(D::weibull(1.5, 1.0), D::weibull(1.5, 0.5));
  const auto r = check_converse(w, default_tail_grid(w));
  CHECK(r.final_discrepancy <= 1e-6);
  CHECK_THROWS_AS(check_converse(CensoringSetup::make(D::weibull(2.0, 1.0), D::weibull(1.0, 1.0)), r.grid),
                  DomainError);
}

TEST_CASE("regular variation of U", "[limits]") {
  const auto e = CensoringSetup::make(D::exponential(1.0), D::exponential(2.0));
  const std::vector<double> t_grid{10.0, 100.0, 1000.0};
  const auto report = check_regular_variation_U(e, t_grid, 3.0);
  CHECK(report.target == Approx(9.0));
  for (double r : report.ratios) CHECK(r == Approx(9.0).epsilon(1e-9));
  CHECK(report.dominance_consistent);
}
