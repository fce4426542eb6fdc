#include <iostream>

#include <CLI11.hpp>

#include "stochlyap/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-step stochastic Lyapunov experiment runner"};
  app.require_subcommand(1);

  stochlyap::cli::RunRequest request;
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::size_t trials = 0, steps = 0;
  double tol = 0.0;

  auto* run = app.add_subcommand("run", "Run one experiment and write summary.json and trace.csv");
  run->add_option("kind", request.kind, "certify | product | async | lineq | classify")
      ->required()
      ->check(CLI::IsMember({"certify", "product", "async", "lineq", "classify"}));
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "64-bit seed (overrides the config)");
  run->add_option("--out", out, "Output directory");
  auto* trials_opt = run->add_option("--trials", trials, "Monte Carlo trials / runs");
  auto* steps_opt = run->add_option("--steps", steps, "Step or iteration budget");
  auto* tol_opt = run->add_option("--tol", tol, "Convergence tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stochlyap::cli::kValidation;
  }

  request.config = config;
  request.out = out;
  if (*seed_opt) request.seed = seed;
  if (*trials_opt) request.trials = trials;
  if (*steps_opt) request.steps = steps;
  if (*tol_opt) request.tol = tol;
  return stochlyap::cli::run(request, std::cerr);
}
