// Experiment runner for the random-walk-in-random-environment laboratory.
//
//   expcli run <config.json> [--output DIR]
//   expcli figure <run-dir>
//   expcli analytics <k:p>... [--beta B]
//   expcli selftest
//
// Exit codes: 0 ok, 2 usage/config error, 3 partial results.

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rwlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"random-media walk experiments"};
  app.require_subcommand(1);

  std::string config_path, output_override, run_dir;
  std::vector<std::string> atoms;
  double beta = 0.0;

  auto* run = app.add_subcommand("run", "run a config-driven experiment");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--output", output_override, "output directory override");

  auto* figure = app.add_subcommand("figure", "emit plot-ready long CSV");
  figure->add_option("run-dir", run_dir, "directory of a finished run")
      ->required();

  auto* analytics =
      app.add_subcommand("analytics", "offspring-law analytics for a pmf");
  analytics->add_option("pmf", atoms, "atoms as k:p")->required();
  analytics->add_option("--beta", beta, "bias for the trapping exponent");

  auto* selftest =
      app.add_subcommand("selftest", "run the closed-form example checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return rwlab::run_experiment(config_path, output_override);
  if (figure->parsed()) return rwlab::make_figure(run_dir);
  if (analytics->parsed()) return rwlab::print_analytics(atoms, beta);
  if (selftest->parsed()) return rwlab::selftest();
  return 2;
}
