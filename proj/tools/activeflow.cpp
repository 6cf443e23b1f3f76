#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "activeflow/activeflow.h"

int main(int argc, char** argv) {
  CLI::App app{"activeflow: pseudo-spectral solver for active particles on the torus"};
  app.require_subcommand(1);

  std::string config;
  for (const char* name : {"simulate", "verify", "decay", "stationary", "oracle-compare"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "path to the JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
  }
  app.get_subcommand("simulate")->description("run a simulation and write diagnostics and snapshots");
  app.get_subcommand("verify")->description("run the acceptance checks and print a PASS/FAIL table");
  app.get_subcommand("decay")->description("check exponential decay to the mean at small Pe");
  app.get_subcommand("stationary")->description("march to a stationary state");
  app.get_subcommand("oracle-compare")->description("compare against the finite-difference oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const nlohmann::json j = {{"error", "ParseError"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return af_run_command(command.c_str(), config.c_str(), nullptr, nullptr, nullptr);
}
