#include "cevt/dist_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "cevt/errors.hpp"
#include "cevt/numerics.hpp"

namespace cevt {

namespace {

using numerics::kInf;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, std::string_view key) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw UsageError("invalid number '" + std::string(text) + "' for parameter '" + std::string(key) + "'");
  return value;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

/// (shape, scale) when the model is Weibull-type; Exponential is shape 1.
std::optional<std::pair<double, double>> as_weibull(const DistributionModel& m) {
  switch (m.family()) {
    case Family::Exponential:
      return std::pair{1.0, m.first_parameter()};
    case Family::Weibull:
      return std::pair{m.first_parameter(), m.second_parameter()};
    default:
      return std::nullopt;
  }
}

/// Decay length used to map [x, inf) onto [0, 1) for tail integrals.
double decay_scale(const DistributionModel& a, const DistributionModel& b, double x) {
  const double x0 = std::max(a.x0(), b.x0());
  if (x > x0) {
    const double fa = a.auxiliary(x);
    const double fb = b.auxiliary(x);
    return fa * fb / (fa + fb);
  }
  return 1.0;
}

double tail_product_integral(const DistributionModel& survivor, const DistributionModel& event, double x) {
  // int_x^inf survivor.tail(s) * event.density(s) ds
  auto integrand = [&](double s) {
    if (s < event.support_lower()) return 0.0;
    const double d = event.density(s);
    if (d == 0.0) return 0.0;
    return s < survivor.support_lower() ? d : d * survivor.tail(s);
  };
  const double lower = std::max(x, std::min(survivor.support_lower(), event.support_lower()));
  if (std::isinf(lower) && lower < 0.0) {
    const double scale = std::max(survivor.first_parameter(), event.first_parameter());
    return numerics::integrate_real_line(integrand, 0.0, scale, {}, "tail mass").value;
  }
  return numerics::integrate_to_infinity(integrand, lower, decay_scale(survivor, event, lower), {}, "tail mass").value;
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::Exponential:
      return "exp";
    case Family::Weibull:
      return "weibull";
    case Family::LogNormal:
      return "lognormal";
    case Family::NormalTail:
      return "normaltail";
  }
  return "?";
}

DistributionModel DistributionModel::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return {Family::Exponential, rate, 0.0, 0.0};
}

DistributionModel DistributionModel::weibull(double shape, double scale) {
  require_positive(shape, "weibull shape");
  require_positive(scale, "weibull scale");
  return {Family::Weibull, shape, scale, 1.0};
}

DistributionModel DistributionModel::lognormal(double sigma) {
  require_positive(sigma, "lognormal sigma");
  return {Family::LogNormal, sigma, 0.0, 1.0};
}

DistributionModel DistributionModel::normal_tail(double sigma) {
  require_positive(sigma, "normaltail sigma");
  return {Family::NormalTail, sigma, 0.0, 1.0};
}

DistributionModel DistributionModel::parse(std::string_view text) {
  const std::string_view whole = trim(text);
  const auto open = whole.find('(');
  if (open == std::string_view::npos || whole.back() != ')')
    throw UsageError("malformed distribution '" + std::string(whole) + "': expected name(key=value,...)");
  const std::string name(trim(whole.substr(0, open)));
  std::string_view body = whole.substr(open + 1, whole.size() - open - 2);

  std::map<std::string, double> params;
  while (!trim(body).empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("malformed parameter '" + std::string(trim(item)) + "' in '" + std::string(whole) + "'");
    const std::string key(trim(item.substr(0, eq)));
    if (params.contains(key)) throw UsageError("duplicate parameter '" + key + "'");
    params[key] = parse_number(item.substr(eq + 1), key);
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }

  auto take = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw UsageError("missing parameter '" + std::string(key) + "' for " + name);
    const double v = it->second;
    params.erase(it);
    return v;
  };
  auto finish = [&](DistributionModel m) {
    if (!params.empty()) throw UsageError("unknown parameter '" + params.begin()->first + "' for " + name);
    return m;
  };
  try {
    if (name == "exp" || name == "exponential") {
      const double rate = take("rate");
      return finish(exponential(rate));
    }
    if (name == "weibull") {
      const double shape = take("shape");
      const double scale = take("scale");
      return finish(weibull(shape, scale));
    }
    if (name == "lognormal") {
      const double sigma = take("sigma");
      return finish(lognormal(sigma));
    }
    if (name == "normaltail") {
      const double sigma = take("sigma");
      return finish(normal_tail(sigma));
    }
  } catch (const DomainError& e) {
    throw UsageError(std::string("invalid distribution '") + std::string(whole) + "': " + e.what());
  }
  throw UsageError("unknown distribution family '" + name + "'");
}

double DistributionModel::support_lower() const { return family_ == Family::NormalTail ? -kInf : 0.0; }

void DistributionModel::check_support(double x, const char* op) const {
  if (std::isnan(x) || (family_ != Family::NormalTail && x < 0.0))
    throw DomainError(std::string(op) + ": x outside the support of " + to_string());
}

double DistributionModel::tail(double x) const {
  check_support(x, "tail");
  switch (family_) {
    case Family::Exponential:
      return std::exp(-p1_ * x);
    case Family::Weibull:
      return std::exp(-p2_ * std::pow(x, p1_));
    case Family::LogNormal:
      return x == 0.0 ? 1.0 : numerics::phi_bar(std::log(x) / p1_);
    case Family::NormalTail:
      return numerics::phi_bar(x / p1_);
  }
  return 0.0;
}

double DistributionModel::log_tail(double x) const {
  check_support(x, "log_tail");
  switch (family_) {
    case Family::Exponential:
      return -p1_ * x;
    case Family::Weibull:
      return -p2_ * std::pow(x, p1_);
    case Family::LogNormal:
      return x == 0.0 ? 0.0 : numerics::log_phi_bar(std::log(x) / p1_);
    case Family::NormalTail:
      return numerics::log_phi_bar(x / p1_);
  }
  return 0.0;
}

double DistributionModel::density(double x) const {
  check_support(x, "density");
  switch (family_) {
    case Family::Exponential:
      return p1_ * std::exp(-p1_ * x);
    case Family::Weibull: {
      if (x == 0.0) return p1_ < 1.0 ? kInf : (p1_ == 1.0 ? p2_ : 0.0);
      const double xa = std::pow(x, p1_);
      return p2_ * p1_ * xa / x * std::exp(-p2_ * xa);
    }
    case Family::LogNormal: {
      if (x == 0.0) return 0.0;
      return numerics::normal_pdf(std::log(x) / p1_) / (x * p1_);
    }
    case Family::NormalTail:
      return numerics::normal_pdf(x / p1_) / p1_;
  }
  return 0.0;
}

double DistributionModel::hazard(double x) const {
  check_support(x, "hazard");
  switch (family_) {
    case Family::Exponential:
      return p1_;
    case Family::Weibull:
      if (x == 0.0) return density(0.0);
      return p2_ * p1_ * std::pow(x, p1_ - 1.0);
    case Family::LogNormal:
      if (x == 0.0) return 0.0;
      return 1.0 / (x * p1_ * numerics::mills_ratio(std::log(x) / p1_));
    case Family::NormalTail:
      return 1.0 / (p1_ * numerics::mills_ratio(x / p1_));
  }
  return 0.0;
}

double DistributionModel::auxiliary(double x) const {
  if (std::isnan(x) || !(x > x0_)) throw DomainError("auxiliary: x must exceed x0 for " + to_string());
  switch (family_) {
    case Family::Exponential:
      return 1.0 / p1_;
    case Family::Weibull:
      return std::pow(x, 1.0 - p1_) / (p2_ * p1_);
    case Family::LogNormal:
      return x * p1_ * numerics::mills_ratio(std::log(x) / p1_);
    case Family::NormalTail:
      return p1_ * numerics::mills_ratio(x / p1_);
  }
  return 0.0;
}

double DistributionModel::inverse_tail(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("inverse_tail: probability outside [0,1]");
  switch (family_) {
    case Family::Exponential:
      return q == 0.0 ? kInf : -std::log(q) / p1_;
    case Family::Weibull:
      return q == 0.0 ? kInf : std::pow(-std::log(q) / p2_, 1.0 / p1_);
    case Family::LogNormal:
      return std::exp(p1_ * numerics::phi_bar_inverse(q));
    case Family::NormalTail:
      return p1_ * numerics::phi_bar_inverse(q);
  }
  return 0.0;
}

double DistributionModel::sample(RandomStream& rng) const {
  switch (family_) {
    case Family::Exponential:
      return rng.standard_exponential() / p1_;
    case Family::Weibull:
      return std::pow(rng.standard_exponential() / p2_, 1.0 / p1_);
    case Family::LogNormal:
      return std::exp(p1_ * rng.standard_normal());
    case Family::NormalTail:
      return p1_ * rng.standard_normal();
  }
  return 0.0;
}

std::string DistributionModel::to_string() const {
  switch (family_) {
    case Family::Exponential:
      return "exp(rate=" + format_double(p1_) + ")";
    case Family::Weibull:
      return "weibull(shape=" + format_double(p1_) + ",scale=" + format_double(p2_) + ")";
    case Family::LogNormal:
      return "lognormal(sigma=" + format_double(p1_) + ")";
    case Family::NormalTail:
      return "normaltail(sigma=" + format_double(p1_) + ")";
  }
  return {};
}

double kappa_of(const DistributionModel& lifetime, const DistributionModel& censoring) {
  const auto wf = as_weibull(lifetime);
  const auto wg = as_weibull(censoring);
  if (wf && wg) {
    const auto [alpha, lambda] = *wf;
    const auto [beta, mu] = *wg;
    if (beta < alpha) return 0.0;
    if (beta > alpha) return kInf;
    return mu / lambda;
  }
  const Family ff = lifetime.family();
  const Family fg = censoring.family();
  if ((ff == Family::LogNormal && fg == Family::LogNormal) || (ff == Family::NormalTail && fg == Family::NormalTail)) {
    const double r = lifetime.first_parameter() / censoring.first_parameter();
    return r * r;
  }
  if (wf && fg == Family::LogNormal) return 0.0;
  throw UnsupportedPairError("no closed-form kappa for lifetime " + lifetime.to_string() + " with censoring " +
                             censoring.to_string());
}

double uncensored_tail_mass(const DistributionModel& lifetime, const DistributionModel& censoring, double x) {
  return tail_product_integral(censoring, lifetime, x);
}

double censored_tail_mass(const DistributionModel& lifetime, const DistributionModel& censoring, double x) {
  return tail_product_integral(lifetime, censoring, x);
}

EventProbabilities event_probabilities(const DistributionModel& lifetime, const DistributionModel& censoring) {
  if (lifetime == censoring) return {0.5, 0.5};
  const auto wf = as_weibull(lifetime);
  const auto wg = as_weibull(censoring);
  if (wf && wg && wf->first == wg->first) {
    const double lambda = wf->second;
    const double mu = wg->second;
    return {lambda / (lambda + mu), mu / (lambda + mu)};
  }
  const double lower = std::min(lifetime.support_lower(), censoring.support_lower());
  const double pu = uncensored_tail_mass(lifetime, censoring, lower);
  return {pu, 1.0 - pu};
}

EventProbabilities event_probabilities(const CensoringSetup& setup) {
  const auto susceptible = event_probabilities(setup.lifetime, setup.censoring);
  const double pu = setup.cure_fraction * susceptible.p_uncensored;
  return {pu, 1.0 - pu};
}

CensoringSetup CensoringSetup::make(DistributionModel lifetime, DistributionModel censoring, double cure_fraction) {
  if (!(cure_fraction >= 0.0 && cure_fraction <= 1.0))
    throw DomainError("cure fraction must lie in [0, 1], got " + format_double(cure_fraction));
  CensoringSetup setup{std::move(lifetime), std::move(censoring), cure_fraction, std::nullopt, 0.0, 0.0};
  try {
    setup.kappa = kappa_of(setup.lifetime, setup.censoring);
  } catch (const UnsupportedPairError&) {
    setup.kappa.reset();
  }
  const auto probs = event_probabilities(setup);
  setup.p_u = probs.p_uncensored;
  setup.p_c = probs.p_censored;
  return setup;
}

double CensoringSetup::x0() const { return std::max(lifetime.x0(), censoring.x0()); }

double CensoringSetup::joint_auxiliary(double x) const {
  const double f = lifetime.auxiliary(x);
  const double g = censoring.auxiliary(x);
  return f * g / (f + g);
}

std::string CensoringSetup::describe() const {
  std::ostringstream out;
  out << "lifetime=" << lifetime.to_string() << " censoring=" << censoring.to_string()
      << " cure_fraction=" << format_double(cure_fraction);
  return out.str();
}

}  // namespace cevt
