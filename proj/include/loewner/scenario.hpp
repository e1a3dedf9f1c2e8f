#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace loewner {

/// Exit codes of the batch runner.
enum ExitCode : int {
  kExitPass = 0,     // every mathematical check passed
  kExitCheckFail = 1,  // a check failed or a numerical contract broke (with witness)
  kExitBadInput = 2,   // unreadable or schema-invalid scenario
};

struct RunOverrides {
  std::optional<int> threads;
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  /// When set, the scenario's task must equal this CLI subcommand.
  std::optional<std::string> expected_task;
};

/// Executes the scenario file and writes <name>_report.txt plus one CSV per
/// table into out_dir (defaults to the scenario's directory).
int run_scenario(const std::filesystem::path& scenario_path,
                 const std::optional<std::filesystem::path>& out_dir = {},
                 const RunOverrides& overrides = {});

}  // namespace loewner
