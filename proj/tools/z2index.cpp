// z2index: index, verify, ledger and sweep commands over JSON configs.

#include <iostream>

#include "CLI11.hpp"
#include "z2index/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary-operator index computations and invariant checks"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  for (const char* name : {"index", "verify", "ledger", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out, "report path (overrides the config's output)");
    sub->add_option("--seed-override", seed, "replaces the config's seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return z2index::kExitInput;
  }

  const CLI::App* sub = app.get_subcommands().front();
  z2index::CliOverrides ov;
  if (sub->count("--out")) ov.out = out;
  if (sub->count("--seed-override")) ov.seed = seed;
  return z2index::run_command_file(sub->get_name(), config, ov, std::cout, std::cerr);
}
