#pragma once

#include <string>
#include <vector>

namespace rwlab {

// Config-driven experiment runner behind the expcli tool. A run consumes a
// JSON config, executes the referenced model experiment with seeded
// replicas, and writes CSV results plus a manifest into the output
// directory. Result files are a pure function of the resolved config (the
// manifest can be re-run for a byte-identical reproduction, at any worker
// count).
//
// Exit codes: 0 ok, 2 config/usage error, 3 partial results (budget
// overruns, truncated or censored replicas).
int run_experiment(const std::string& config_path,
                   const std::string& output_override = "");

// Reshapes a run directory's results into plot-ready long-format rows
// (x, y, series, ci_lo, ci_hi) in figure.csv.
int make_figure(const std::string& run_dir);

// Prints q, m, beta_c, sigma^2, the Harris split and alpha(beta) for a pmf
// given as "k:p" atoms.
int print_analytics(const std::vector<std::string>& atoms, double beta);

// Compact self-check over the closed-form examples; prints one line per
// check, returns nonzero on any failure.
int selftest();

}  // namespace rwlab
