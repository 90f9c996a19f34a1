#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwlab/seed_tree.hpp"

namespace rwlab {

// A point estimate with uncertainty and provenance. Every estimator here is
// deterministic given its inputs and (where applicable) the bootstrap seed.
struct EstimateReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t replicas = 0;
  std::string method;
  bool flagged = false;
  std::string flag_note;
};

double median(std::vector<double> values);
double quantile_sorted(const std::vector<double>& sorted, double q);

// Hill estimator of the tail index over the top k = floor(k_fraction * n)
// order statistics; std error alpha_hat / sqrt(k). Ties at the top are
// flagged (the estimator degenerates on constant tails).
EstimateReport hill_tail_index(std::span<const double> samples,
                               double k_fraction);

// Two-sample Kolmogorov-Smirnov distance (sup norm of empirical CDFs).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

// Weighted least squares y ~ slope * x + intercept. Empty weights = 1.
LinearFit least_squares(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w = {});

// Least-squares slope of ln(value) against ln(n). Rejects nonpositive input.
EstimateReport loglog_slope(std::span<const double> n,
                            std::span<const double> value,
                            std::span<const double> weights = {});

// Percentile bootstrap over item indices: `stat` maps a resampled index
// multiset to a scalar. Returns (lo, hi) of the central 95% band.
std::pair<double, double> bootstrap_percentile_ci(
    std::size_t n_items,
    const std::function<double(const std::vector<std::uint32_t>&)>& stat,
    int resamples, Stream& stream);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// Pearson chi-square p-value of observed counts against expected
// probabilities (upper tail, df = cells - 1).
double chi_square_pvalue(std::span<const std::int64_t> observed,
                         std::span<const double> expected_probs);

// Median-regression exponent estimate shared by the walk modules: per grid
// point takes the median across replicas of a positive statistic, fits
// ln(median) ~ slope * ln(n), and bootstraps replicas for the CI. Grid and
// per-replica rows must align: rows[r][i] is replica r's value at grid[i].
EstimateReport loglog_slope_of_medians(
    const std::vector<double>& grid,
    const std::vector<std::vector<double>>& rows, int resamples,
    Stream& bootstrap_stream);

}  // namespace rwlab
