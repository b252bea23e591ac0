#include "cevt/app.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "cevt/analysis.hpp"
#include "cevt/errors.hpp"
#include "cevt/evt_limits.hpp"
#include "cevt/kme.hpp"
#include "cevt/presets.hpp"

namespace cevt {

namespace {

using nlohmann::json;

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NA"; }
    std::string operator()(double v) const {
      if (std::isnan(v)) return "NA";
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return buf;
    }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const {
      if (v.find_first_of(",\"\n") == std::string::npos) return v;
      std::string quoted = "\"";
      for (char c : v) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + "\"";
    }
  };
  return std::visit(Visitor{}, cell);
}

json cell_json(const Cell& cell) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(double v) const { return std::isfinite(v) ? json(v) : json(format_cell(v)); }
    json operator()(std::int64_t v) const { return v; }
    json operator()(bool v) const { return v; }
    json operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }
Cell count(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }

CensoringSetup setup_of(const ExperimentConfig& c) {
  return CensoringSetup::make(DistributionModel::parse(*c.lifetime), DistributionModel::parse(*c.censoring),
                              c.cure_fraction);
}

Table simulate_table(const ExperimentConfig& c, std::ostream& err) {
  const auto setup = setup_of(c);
  ReplicationOptions options;
  options.with_norming = setup.proper() && c.n >= 2;
  options.threads = c.threads;
  const auto result = run_replications(setup, c.n, c.reps, c.seed, options);
  if (result.absent_uncensored > 0)
    err << "cevt: " << result.absent_uncensored << " of " << result.rep_count
        << " replications had no uncensored observation (M_u = NA)\n";
  Table t{{"rep", "M_u", "M_c", "M", "N_u", "N_c", "N_c_exceed", "norm_L", "norm_R"}, {}};
  for (std::size_t r = 0; r < result.stats.size(); ++r) {
    const auto& s = result.stats[r];
    t.rows.push_back({count(r), opt(s.max_uncensored), opt(s.max_censored), s.max_overall, count(s.n_uncensored),
                      count(s.n_censored), count(s.censored_exceedances), opt(s.norm_l), opt(s.norm_r)});
  }
  return t;
}

std::size_t as_index(double x) {
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e9)
    throw UsageError("--grid values must be non-negative integers for count laws, got " + std::to_string(x));
  return static_cast<std::size_t>(x);
}

Table limits_table(const ExperimentConfig& c) {
  const auto grid = parse_grid(c.grid);
  Table t{{"kind", "kappa", "x_or_j", "value"}, {}};
  for (double x : grid) {
    double value = 0.0;
    if (c.law == "l") {
      value = l_law_cdf(*c.kappa, x);
    } else if (c.law == "r") {
      value = r_law_tail(*c.kappa, x);
    } else if (c.law == "geom") {
      value = LimitLaw::geometric_count(*c.kappa).pmf(as_index(x));
    } else if (c.law == "poisson") {
      value = poisson_mixture_pmf(*c.kappa, as_index(x));
    } else {
      value = gumbel_marginal_cdf(c.t, x);
    }
    const bool discrete = c.law == "geom" || c.law == "poisson";
    t.rows.push_back({c.law, c.law == "gumbel" ? Cell{} : Cell{*c.kappa},
                      discrete ? count(as_index(x)) : Cell{x}, value});
  }
  return t;
}

Table kme_table(const ExperimentConfig& c) {
  const auto curve = fit_kme(read_dataset(c.in));
  Table t{{"field", "time", "value"}, {}};
  for (std::size_t i = 0; i < curve.jump_times.size(); ++i)
    t.rows.push_back({std::string("survivor"), curve.jump_times[i], curve.survivor_values[i]});
  t.rows.push_back({std::string("level_stretch"), Cell{}, curve.level_stretch});
  t.rows.push_back({std::string("exceed_count"), Cell{}, count(curve.exceed_count)});
  t.rows.push_back({std::string("plateau_level"), Cell{}, curve.plateau_level});
  t.rows.push_back({std::string("has_uncensored"), Cell{}, curve.has_uncensored});
  return t;
}

Table test_cure_table(const ExperimentConfig& c) {
  const auto sample = read_dataset(c.in);
  const auto result = cure_test(sample, c.alpha, c.estimate_kappa ? std::nullopt : c.kappa);
  Table t{{"source", "observed_R", "kappa_hat", "alpha", "critical_value", "outcome", "reject"}, {}};
  t.rows.push_back({std::string(source_name(result.source)), result.observed_r, result.kappa_hat, result.alpha,
                    opt(result.critical_value), std::string(outcome_name(result.outcome)), result.reject});
  return t;
}

Table verify_table(const ExperimentConfig& c, int& exit_code) {
  PresetContext context{c.seed, c.threads, c.tolerances};
  const auto rows = c.preset.empty() ? run_custom_verify(setup_of(c), c.n, c.reps, context)
                                     : run_preset(c.preset, context);
  Table t{{"check", "statistic", "observed", "threshold", "sample_size", "pass", "detail"}, {}};
  for (const auto& r : rows) {
    if (!r.pass) exit_code = kExitCheckFailed;
    t.rows.push_back({r.check, r.statistic, r.observed, r.threshold, count(r.sample_size), r.pass, r.detail});
  }
  return t;
}

}  // namespace

void write_table(std::ostream& os, const Table& table, const ExperimentConfig& config) {
  const std::string timestamp = utc_timestamp();
  if (config.format == OutputFormat::Json) {
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
      rows.push_back(std::move(obj));
    }
    json doc{{"metadata", {{"version", kVersion}, {"seed", config.seed}, {"config", config.to_json()},
                           {"timestamp", timestamp}}},
             {"columns", table.columns},
             {"rows", std::move(rows)}};
    os << doc.dump(2) << '\n';
    return;
  }
  os << "# cevt " << kVersion << '\n';
  os << "# seed: " << config.seed << '\n';
  os << "# config: " << config.to_json().dump() << '\n';
  os << "# timestamp: " << timestamp << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

SurvivalSample read_dataset(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw UsageError("cannot open dataset '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(file, line)) {
    ++line_no;
    line = trim(line);
    if (!line.empty() && line[0] != '#') break;
  }
  if (line != "time,censored")
    throw UsageError(path + ":" + std::to_string(line_no) + ": expected header 'time,censored'");
  SurvivalSample sample;
  while (std::getline(file, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (comma == std::string::npos) throw UsageError(where + "expected two columns");
    const std::string time_text = trim(line.substr(0, comma));
    const std::string flag = trim(line.substr(comma + 1));
    double time = 0.0;
    auto [ptr, ec] = std::from_chars(time_text.data(), time_text.data() + time_text.size(), time);
    if (ec != std::errc{} || ptr != time_text.data() + time_text.size() || !std::isfinite(time))
      throw UsageError(where + "time '" + time_text + "' is not a finite number");
    if (flag != "0" && flag != "1") throw UsageError(where + "censored must be 0 or 1, got '" + flag + "'");
    sample.observations.push_back({time, flag == "1"});
  }
  if (sample.observations.empty()) throw UsageError("dataset '" + path + "' has no rows");
  return sample;
}

Table build_table(const ExperimentConfig& config, int& exit_code, std::ostream& err) {
  exit_code = kExitOk;
  switch (config.command) {
    case Command::Simulate:
      return simulate_table(config, err);
    case Command::Limits:
      return limits_table(config);
    case Command::Kme:
      return kme_table(config);
    case Command::Verify:
      return verify_table(config, exit_code);
    case Command::TestCure:
      return test_cure_table(config);
  }
  throw UsageError("unknown command");
}

int run(const ExperimentConfig& config, std::ostream& os, std::ostream& err) {
  int exit_code = kExitOk;
  const Table table = build_table(config, exit_code, err);
  if (config.out.empty()) {
    write_table(os, table, config);
  } else {
    std::ofstream file(config.out);
    if (!file) throw UsageError("cannot write --out file '" + config.out + "'");
    write_table(file, table, config);
  }
  return exit_code;
}

int main_entry(int argc, const char* const* argv, std::ostream& os, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(parse_config(args), os, err);
  } catch (const HelpRequested& help) {
    os << help.text;
    return kExitOk;
  } catch (const UsageError& e) {
    err << "cevt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "cevt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedPairError& e) {
    err << "cevt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "cevt: error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace cevt
