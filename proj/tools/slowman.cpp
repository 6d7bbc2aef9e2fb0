// slowman <subcommand> --config <path> [--out <dir>]
//
// exit codes: 0 ok, 1 bad input, 2 a validation threshold failed,
// 3 numerical abort (resonance, small divisor, Newton, integrator), 4 I/O.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "slowman/pipeline.hpp"

using namespace slowman;

namespace {

int execute(Command command, const std::string& config_path, const std::string& out, bool quiet) {
  RunConfig config;
  try {
    config = load_config(config_path);
    if (!out.empty()) config.out = out;
    config.validate();
  } catch (const IoError& e) {
    std::cerr << "slowman: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "slowman: config: " << e.what() << '\n';
    return 1;
  }

  CommandResult result;
  try {
    result = run_command(command, config);
  } catch (const StageError& e) {
    std::cerr << "slowman: stage " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "slowman: " << e.what() << '\n';
    return 1;
  }

  if (!quiet) {
    for (const auto& c : result.checks) {
      std::printf("%-24s %-4s %.3e (limit %.1e)\n", c.name.c_str(), c.pass ? "ok" : "FAIL", c.value, c.limit);
    }
    std::printf("%s: %s, artifacts in %s\n", command_name(command).c_str(),
                result.manifest.value("status", std::string("?")).c_str(), config.out.string().c_str());
  }
  return result.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slow submanifold and response-function expansions of a limit cycle"};
  app.set_version_flag("--version", std::string("slowman ") + tool_version);
  app.require_subcommand(1);

  std::string config_path, out;
  bool quiet = false;
  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::run, "full pipeline, all artifacts and plot data"},
      {Command::cycle, "find the limit cycle"},
      {Command::floquet, "Floquet spectrum, resonance check and frames"},
      {Command::manifold, "Fourier-Taylor coefficients K_n of the slow submanifold"},
      {Command::response, "phase and amplitude response expansions Z_n, I_n"},
      {Command::validate, "accuracy domain and consistency checks"},
      {Command::export_data, "plot data from existing artifacts"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [cmd, help] : commands) {
    auto* sub = app.add_subcommand(command_name(cmd), help);
    sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_flag("-q,--quiet", quiet, "no summary on stdout");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) return execute(commands[i].first, config_path, out, quiet);
  }
  return 1;
}
