#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nkmart/cli_runner.hpp"
#include "nkmart/scenarios.hpp"
#include "nkmart/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical diagnostics for the true-martingale property of stochastic exponentials"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("--config", config_path, "Path to the experiment config")->required();

  std::string manifest_path;
  auto* list = app.add_subcommand("list-scenarios", "Print the scenario catalog");
  list->add_option("--json", manifest_path, "Also write the catalog manifest to this file");

  auto* version = app.add_subcommand("version", "Print the library version");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    nkmart::cli::RunResult result;
    try {
      result = nkmart::cli::run_experiment(nkmart::cli::load_config(config_path));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return nkmart::cli::kExitError;
    }
    if (result.exit_code == nkmart::cli::kExitError) {
      std::cerr << "error: " << result.message << '\n';
    } else {
      std::cout << result.message << '\n';
    }
    return result.exit_code;
  }
  if (*list) {
    std::cout << nkmart::cli::scenario_table();
    if (!manifest_path.empty()) {
      std::ofstream f(manifest_path);
      if (!f) {
        std::cerr << "error: cannot write " << manifest_path << '\n';
        return nkmart::cli::kExitError;
      }
      f << nkmart::scenarios::catalog_manifest().dump(2) << '\n';
    }
    return nkmart::cli::kExitOk;
  }
  if (*version) {
    std::cout << "nkmart " << nkmart::kVersion << '\n';
  }
  return nkmart::cli::kExitOk;
}
