#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cevt {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Simulate, Limits, Kme, Verify, TestCure };
enum class OutputFormat { Csv, Json };

std::string command_name(Command command);

/// Everything a CLI run needs. Field names match the long flag names and the keys of
/// a JSON config file.
struct ExperimentConfig {
  Command command = Command::Simulate;

  std::optional<std::string> lifetime;
  std::optional<std::string> censoring;
  double cure_fraction = 1.0;
  std::size_t n = 10000;
  std::size_t reps = 5000;
  std::uint64_t seed = 42;
  unsigned threads = 0;

  std::string out;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;

  // limits
  std::string law;
  std::optional<double> kappa;
  std::string grid;
  double t = 1.0;

  // kme, test-cure
  std::string in;
  double alpha = 0.05;
  bool estimate_kappa = false;

  // verify
  std::string preset;
  std::map<std::string, double> tolerances;

  nlohmann::json to_json() const;
  /// Inverse of to_json; unknown keys are a UsageError.
  static ExperimentConfig from_json(const nlohmann::json& j);

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses `<command> [flags]`. A `--config file.json` supplies defaults that explicit
/// flags override. Throws UsageError naming the offending flag or key; `--help` throws
/// HelpRequested carrying the help text.
ExperimentConfig parse_config(const std::vector<std::string>& args);

struct HelpRequested {
  std::string text;
};

/// Reads the config echo from the metadata of a file written by `run`.
ExperimentConfig read_config_echo(const std::string& path);

/// Parses "a:b:step" into a list (the endpoint is included when hit to within 1e-9 step),
/// or a comma-separated list of numbers.
std::vector<double> parse_grid(const std::string& text);

}  // namespace cevt
