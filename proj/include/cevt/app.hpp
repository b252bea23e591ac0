#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "cevt/censor_sim.hpp"
#include "cevt/config.hpp"

namespace cevt {

/// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// A table cell; monostate is written as NA (CSV) or null (JSON).
using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Writes the metadata header (version, seed, config echo, timestamp) and the rows.
/// Doubles use 17 significant digits in CSV.
void write_table(std::ostream& os, const Table& table, const ExperimentConfig& config);

/// Reads a dataset with header `time,censored` and censored in {0, 1}.
SurvivalSample read_dataset(const std::string& path);

/// Builds the result table for a validated config; `exit_code` is set to 1 when a
/// verify check fails. Notes such as dropped replications go to `err`.
Table build_table(const ExperimentConfig& config, int& exit_code, std::ostream& err);

/// Runs the config, writing to config.out or to `os` when no path is given.
int run(const ExperimentConfig& config, std::ostream& os, std::ostream& err);

/// Command-line entry point: parses argv, runs, maps errors to exit codes.
int main_entry(int argc, const char* const* argv, std::ostream& os, std::ostream& err);

}  // namespace cevt
