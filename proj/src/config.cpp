#include "cevt/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cevt/dist_models.hpp"
#include "cevt/errors.hpp"
#include "cevt/presets.hpp"

namespace cevt {

namespace {

using nlohmann::json;

const std::map<std::string, Command>& command_table() {
  static const std::map<std::string, Command> table{{"simulate", Command::Simulate},
                                                    {"limits", Command::Limits},
                                                    {"kme", Command::Kme},
                                                    {"verify", Command::Verify},
                                                    {"test-cure", Command::TestCure}};
  return table;
}

const std::set<std::string> kLaws{"l", "r", "geom", "poisson", "gumbel"};

template <typename T>
T json_get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

/// Flag values as parsed by CLI11; unset optionals leave the config untouched.
struct FlagValues {
  std::optional<std::string> config_path;
  std::optional<std::string> lifetime, censoring, out, format, law, grid, in, preset;
  std::optional<double> cure_fraction, kappa, t, alpha;
  std::optional<std::size_t> n, reps;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool estimate_kappa = false;
  std::vector<std::string> tolerances;
};

void add_common(CLI::App& sub, FlagValues& v) {
  sub.add_option("--config", v.config_path, "JSON config file; explicit flags override its values");
  sub.add_option("--out", v.out, "Output path (default: standard output)");
  sub.add_option("--format", v.format, "Output format: csv or json");
}

void add_setup(CLI::App& sub, FlagValues& v) {
  sub.add_option("--lifetime", v.lifetime, "Lifetime family, e.g. exp(rate=1)");
  sub.add_option("--censoring", v.censoring, "Censoring family, e.g. weibull(shape=2,scale=1)");
  sub.add_option("--cure-fraction", v.cure_fraction, "Susceptible fraction p");
  sub.add_option("--n", v.n, "Sample size");
  sub.add_option("--reps", v.reps, "Number of replications");
  sub.add_option("--seed", v.seed, "Master seed");
  sub.add_option("--threads", v.threads, "Worker threads (default: CEVT_THREADS or 1)");
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw UsageError("--format must be csv or json, got '" + s + "'");
}

std::string format_name(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

void apply_flags(ExperimentConfig& c, const FlagValues& v) {
  if (v.lifetime) c.lifetime = v.lifetime;
  if (v.censoring) c.censoring = v.censoring;
  if (v.cure_fraction) c.cure_fraction = *v.cure_fraction;
  if (v.n) c.n = *v.n;
  if (v.reps) c.reps = *v.reps;
  if (v.seed) c.seed = *v.seed;
  if (v.threads) c.threads = *v.threads;
  if (v.out) c.out = *v.out;
  if (v.format) c.format = parse_format(*v.format);
  if (v.law) c.law = *v.law;
  if (v.kappa) c.kappa = v.kappa;
  if (v.grid) c.grid = *v.grid;
  if (v.t) c.t = *v.t;
  if (v.in) c.in = *v.in;
  if (v.alpha) c.alpha = *v.alpha;
  if (v.estimate_kappa) c.estimate_kappa = true;
  if (v.preset) c.preset = *v.preset;
  for (const auto& item : v.tolerances) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--tolerance expects name=value, got '" + item + "'");
    double value = 0.0;
    const std::string text = item.substr(eq + 1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw UsageError("--tolerance value for '" + item.substr(0, eq) + "' is not a number");
    c.tolerances[item.substr(0, eq)] = value;
  }
}

CensoringSetup build_setup(const ExperimentConfig& c) {
  if (!c.lifetime) throw UsageError("--lifetime is required for " + command_name(c.command));
  if (!c.censoring) throw UsageError("--censoring is required for " + command_name(c.command));
  auto lifetime = DistributionModel::parse(*c.lifetime);
  auto censoring = DistributionModel::parse(*c.censoring);
  return CensoringSetup::make(lifetime, censoring, c.cure_fraction);
}

void validate(const ExperimentConfig& c) {
  if (!(c.cure_fraction >= 0.0 && c.cure_fraction <= 1.0))
    throw UsageError("--cure-fraction must lie in [0, 1], got " + std::to_string(c.cure_fraction));
  if (c.reps < 1) throw UsageError("--reps must be at least 1");
  if (c.n < 1) throw UsageError("--n must be at least 1");
  switch (c.command) {
    case Command::Simulate:
      build_setup(c);
      break;
    case Command::Verify: {
      for (const auto& [name, value] : c.tolerances)
        if (!std::isfinite(value) || value < 0.0) throw UsageError("--tolerance " + name + " must be >= 0");
      if (!c.preset.empty()) {
        if (c.lifetime || c.censoring) throw UsageError("--preset cannot be combined with --lifetime/--censoring");
        if (!is_preset(c.preset)) throw UsageError("unknown preset '" + c.preset + "'");
        const auto names = preset_check_names(c.preset);
        for (const auto& [name, value] : c.tolerances)
          if (std::find(names.begin(), names.end(), name) == names.end())
            throw UsageError("--tolerance names unknown check '" + name + "' for preset " + c.preset);
        break;
      }
      const auto setup = build_setup(c);
      if (!setup.proper()) throw UsageError("verify requires --cure-fraction 1 (the limit laws assume a proper F)");
      if (!setup.kappa) throw UsageError("verify: no closed-form kappa for this pair");
      if (std::isinf(*setup.kappa))
        throw UsageError("verify: kappa = inf for this pair; the limit laws are only defined for finite kappa");
      if (c.n < 2) throw UsageError("--n must be at least 2 for verify");
      const auto names = custom_check_names(*setup.kappa);
      for (const auto& [name, value] : c.tolerances)
        if (std::find(names.begin(), names.end(), name) == names.end())
          throw UsageError("--tolerance names unknown check '" + name + "'");
      break;
    }
    case Command::Limits:
      if (!kLaws.contains(c.law)) throw UsageError("--law must be one of l, r, geom, poisson, gumbel");
      if (c.grid.empty()) throw UsageError("--grid is required for limits");
      parse_grid(c.grid);
      if (c.law != "gumbel" && !c.kappa) throw UsageError("--kappa is required for --law " + c.law);
      if (c.law == "gumbel" && !(c.t > 0.0)) throw UsageError("--t must be positive");
      break;
    case Command::Kme:
      if (c.in.empty()) throw UsageError("--in is required for kme");
      break;
    case Command::TestCure:
      if (c.in.empty()) throw UsageError("--in is required for test-cure");
      if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
      if (c.kappa.has_value() == c.estimate_kappa)
        throw UsageError("test-cure needs exactly one of --kappa and --estimate-kappa");
      if (c.kappa && !(*c.kappa >= 0.0)) throw UsageError("--kappa must be >= 0");
      break;
  }
}

}  // namespace

std::string command_name(Command command) {
  for (const auto& [name, value] : command_table())
    if (value == command) return name;
  return "?";
}

json ExperimentConfig::to_json() const {
  json tol = json::object();
  for (const auto& [k, v] : tolerances) tol[k] = v;
  return json{{"command", command_name(command)},
              {"lifetime", lifetime ? json(*lifetime) : json(nullptr)},
              {"censoring", censoring ? json(*censoring) : json(nullptr)},
              {"cure-fraction", cure_fraction},
              {"n", n},
              {"reps", reps},
              {"seed", seed},
              {"threads", threads},
              {"out", out},
              {"format", format_name(format)},
              {"law", law},
              {"kappa", kappa ? json(*kappa) : json(nullptr)},
              {"grid", grid},
              {"t", t},
              {"in", in},
              {"alpha", alpha},
              {"estimate-kappa", estimate_kappa},
              {"preset", preset},
              {"tolerance", tol}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      const auto name = json_get<std::string>(value, key);
      const auto it = command_table().find(name);
      if (it == command_table().end()) throw UsageError("config key 'command' names unknown command '" + name + "'");
      c.command = it->second;
    } else if (key == "lifetime") {
      if (!value.is_null()) c.lifetime = json_get<std::string>(value, key);
    } else if (key == "censoring") {
      if (!value.is_null()) c.censoring = json_get<std::string>(value, key);
    } else if (key == "cure-fraction") {
      c.cure_fraction = json_get<double>(value, key);
    } else if (key == "n") {
      c.n = json_get<std::size_t>(value, key);
    } else if (key == "reps") {
      c.reps = json_get<std::size_t>(value, key);
    } else if (key == "seed") {
      c.seed = json_get<std::uint64_t>(value, key);
    } else if (key == "threads") {
      c.threads = json_get<unsigned>(value, key);
    } else if (key == "out") {
      c.out = json_get<std::string>(value, key);
    } else if (key == "format") {
      c.format = parse_format(json_get<std::string>(value, key));
    } else if (key == "law") {
      c.law = json_get<std::string>(value, key);
    } else if (key == "kappa") {
      if (!value.is_null()) c.kappa = json_get<double>(value, key);
    } else if (key == "grid") {
      c.grid = json_get<std::string>(value, key);
    } else if (key == "t") {
      c.t = json_get<double>(value, key);
    } else if (key == "in") {
      c.in = json_get<std::string>(value, key);
    } else if (key == "alpha") {
      c.alpha = json_get<double>(value, key);
    } else if (key == "estimate-kappa") {
      c.estimate_kappa = json_get<bool>(value, key);
    } else if (key == "preset") {
      c.preset = json_get<std::string>(value, key);
    } else if (key == "tolerance") {
      if (!value.is_object()) throw UsageError("config key 'tolerance' must be an object");
      for (const auto& [name, v] : value.items()) c.tolerances[name] = json_get<double>(v, "tolerance." + name);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Extremes of censored lifetimes: simulation and limit-law verification", "cevt"};
  app.require_subcommand(1);
  FlagValues v;

  auto* simulate = app.add_subcommand("simulate", "Replicated Monte Carlo of the censoring model");
  add_common(*simulate, v);
  add_setup(*simulate, v);

  auto* limits = app.add_subcommand("limits", "Evaluate a limit law on a grid");
  add_common(*limits, v);
  limits->add_option("--law", v.law, "l | r | geom | poisson | gumbel");
  limits->add_option("--kappa", v.kappa, "Balance parameter");
  limits->add_option("--grid", v.grid, "start:stop:step or a comma-separated list");
  limits->add_option("--t", v.t, "Time index of the Gumbel extremal-process marginal");

  auto* kme = app.add_subcommand("kme", "Kaplan-Meier step table and level stretch");
  add_common(*kme, v);
  kme->add_option("--in", v.in, "CSV with header time,censored");

  auto* verify = app.add_subcommand("verify", "Run a verification preset or a custom pair");
  add_common(*verify, v);
  add_setup(*verify, v);
  verify->add_option("--preset", v.preset, "Preset name, e.g. exp-kappa1 or all-fast");
  verify->add_option("--tolerance", v.tolerances, "Threshold override, check=value (repeatable)");

  auto* test_cure = app.add_subcommand("test-cure", "Test H0: kappa = 0 on a dataset");
  add_common(*test_cure, v);
  test_cure->add_option("--in", v.in, "CSV with header time,censored");
  test_cure->add_option("--alpha", v.alpha, "Test level in (0, 1)");
  test_cure->add_option("--kappa", v.kappa, "Known or estimated kappa");
  test_cure->add_flag("--estimate-kappa", v.estimate_kappa, "Use the sample exceedance count as kappa");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  ExperimentConfig config;
  const auto chosen = app.get_subcommands().front()->get_name();
  config.command = command_table().at(chosen);
  if (v.config_path) {
    std::ifstream file(*v.config_path);
    if (!file) throw UsageError("cannot open --config file '" + *v.config_path + "'");
    json j;
    try {
      file >> j;
    } catch (const json::exception& e) {
      throw UsageError("--config file is not valid JSON: " + std::string(e.what()));
    }
    config = ExperimentConfig::from_json(j);
    if (j.contains("command") && config.command != command_table().at(chosen))
      throw UsageError("config key 'command' disagrees with the subcommand '" + chosen + "'");
    config.command = command_table().at(chosen);
  }
  apply_flags(config, v);
  validate(config);
  return config;
}

ExperimentConfig read_config_echo(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw UsageError("cannot open '" + path + "'");
  const std::string prefix = "# config: ";
  std::string line;
  if (file.peek() == '{') {
    json j;
    file >> j;
    return ExperimentConfig::from_json(j.at("metadata").at("config"));
  }
  while (std::getline(file, line)) {
    if (line.rfind(prefix, 0) == 0) return ExperimentConfig::from_json(json::parse(line.substr(prefix.size())));
    if (line.empty() || line[0] != '#') break;
  }
  throw UsageError("'" + path + "' has no config echo in its metadata");
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
      throw UsageError("--grid: '" + s + "' is not a number");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("--grid expects start:stop:step");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError("--grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1000000) throw UsageError("--grid has too many points");
    for (std::size_t i = 0; i < count; ++i) {
      // Round to 15 significant digits so 0.1:0.9:0.1 yields 0.3 rather than 0.30000000000000004.
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.15g", start + static_cast<double>(i) * step);
      out.push_back(std::strtod(buf, nullptr));
    }
    return out;
  }
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(number(part));
  if (out.empty()) throw UsageError("--grid is empty");
  return out;
}

}  // namespace cevt
