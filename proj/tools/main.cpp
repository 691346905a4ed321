#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace ralmkit::cli;

  CLI::App app{"ralmkit: Riemannian augmented Lagrangian solver and certificates"};
  app.require_subcommand(1);

  std::string config;
  std::string point;
  std::string multiplier;
  std::string log;
  double tail = 0.5;
  int samples = 20;
  std::optional<std::uint64_t> seed;

  auto* solve = app.add_subcommand("solve", "run the solver on a config");
  solve->add_option("--config", config, "JSON run config")->required();
  solve->add_option("--seed", seed, "overrides output.seed");

  auto* certify = app.add_subcommand("certify", "second-order certificates at a point");
  certify->add_option("--config", config, "JSON run config")->required();
  certify->add_option("--point", point, "CSV point")->required();
  certify->add_option("--multiplier", multiplier, "CSV multiplier")->required();

  auto* rate = app.add_subcommand("rate", "fit a linear rate to a solve log");
  rate->add_option("--log", log, "iterate CSV")->required();
  rate->add_option("--tail", tail, "trailing fraction used for the fit")
      ->check(CLI::Range(0.0, 1.0));

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference derivative check");
  gradcheck->add_option("--config", config, "JSON run config")->required();
  gradcheck->add_option("--samples", samples, "random (point, direction) pairs")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", seed, "overrides output.seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 uses 0 for --help; every other parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  init_logging();
  if (*solve) return cmd_solve(config, seed, std::cout, std::cerr);
  if (*certify) return cmd_certify(config, point, multiplier, std::cout, std::cerr);
  if (*rate) return cmd_rate(log, tail, std::cout, std::cerr);
  return cmd_gradcheck(config, samples, seed, std::cout, std::cerr);
}
