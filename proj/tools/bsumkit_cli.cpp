#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsumkit/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bsumkit: block successive upper-bound minimization runs"};
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "run a solver from a JSON config");
  run->add_option("config", run_path, "config file")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-surrogate", "check surrogate assumptions for a config");
  validate->add_option("config", validate_path, "config file")->required();

  std::string name;
  std::string out_dir = "reproduce_out";
  auto* reproduce = app.add_subcommand("reproduce", "run a bundled experiment");
  reproduce->add_option("experiment", name, "experiment name")->required();
  reproduce->add_option("--out", out_dir, "directory for trace CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*run) return bsum::cli_run(run_path, std::cout, std::cerr);
  if (*validate) return bsum::cli_validate_surrogate(validate_path, std::cout, std::cerr);
  return bsum::cli_reproduce(name, out_dir, std::cout, std::cerr);
}
