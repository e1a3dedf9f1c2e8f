#include <CLI11.hpp>

#include "loewner/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out_dir;
  int threads = 0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory (default: next to input)");
  cmd->add_option("--threads", args.threads, "Worker thread budget");
  cmd->add_option("--abs-tol", args.abs_tol, "Override absolute integration tolerance");
  cmd->add_option("--rel-tol", args.rel_tol, "Override relative integration tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "loewner-control: flows of the Loewner equation on the unit ball of C^n,\n"
      "needle variations, and first-order extremality checks"};
  app.require_subcommand(1);

  const std::vector<std::string> tasks{"flow",        "map",        "vary",
                                       "hamiltonian", "pontryagin", "pommerenke",
                                       "screen",      "membership"};
  std::map<std::string, CommonArgs> args;
  for (const std::string& task : tasks) add_common(app.add_subcommand(task), args[task]);

  CLI11_PARSE(app, argc, argv);

  for (const std::string& task : tasks) {
    if (!app.get_subcommand(task)->parsed()) continue;
    const CommonArgs& a = args[task];
    loewner::RunOverrides overrides;
    overrides.expected_task = task;
    if (a.threads > 0) overrides.threads = a.threads;
    if (a.abs_tol > 0) overrides.abs_tol = a.abs_tol;
    if (a.rel_tol > 0) overrides.rel_tol = a.rel_tol;
    std::optional<std::filesystem::path> out;
    if (!a.out_dir.empty()) out = a.out_dir;
    return loewner::run_scenario(a.scenario, out, overrides);
  }
  return loewner::kExitBadInput;
}
