#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwlab/offspring.hpp"
#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"
#include "rwlab/tree_arena.hpp"

namespace rwlab {

// Fixed bias beta > 0, or a random per-edge bias law nu.
class BiasSpec {
 public:
  static BiasSpec fixed(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("BiasSpec: beta must be > 0");
    BiasSpec b;
    b.beta_ = beta;
    return b;
  }
  static BiasSpec random(BiasLaw nu) {
    BiasSpec b;
    b.nu_ = std::move(nu);
    return b;
  }
  bool is_random() const { return nu_.has_value(); }
  double beta() const { return beta_; }
  const BiasLaw& nu() const { return *nu_; }

 private:
  BiasSpec() = default;
  double beta_ = 1.0;
  std::optional<BiasLaw> nu_;
};

struct TreeWalkOptions {
  std::int64_t budget = 1'000'000;
  std::int32_t record_levels = 0;          // record delta_1..delta_L
  std::vector<std::int64_t> sample_steps;  // sorted; |X_n| snapshots
};

struct TreeWalkRecord {
  std::vector<std::int64_t> delta;      // -1 where the level was not reached
  std::vector<std::int32_t> depth_at;   // |X_n| at the requested steps
  std::int64_t root_visits = 0;
  std::int64_t steps = 0;
  std::int32_t max_depth = 0;
  std::int32_t final_depth = 0;
  bool partial = false;  // budget exhausted before record_levels was reached
  bool aborted = false;  // arena node cap
};

// Biased walk per the tree transition rules: from u with k children,
// P[parent] = 1/(1 + beta k) and P[child i] = beta/(1 + beta k); at the
// root, fixed bias moves uniformly over children while random bias uses the
// artificial-parent rule. Random bias replaces beta by the per-edge marks.
TreeWalkRecord simulate_tree_walk(TreeArena& tree, const BiasSpec& bias,
                                  const TreeWalkOptions& options,
                                  Stream& stream);

// Annealed speed estimate: mean over replicas of the post-burn-in depth
// increment per step, on conditioned (harris-mode) trees.
EstimateReport tree_walk_speed(const OffspringLaw& law, const BiasSpec& bias,
                               std::int64_t steps, std::size_t replicas,
                               SeedTree seeds, unsigned workers = 0,
                               double burn_in = 0.1);

// Median-regression estimate of the exponent of delta_n (the level hitting
// times) over the grid of levels; rows with unreached levels are dropped.
struct TreeDeltaExponent {
  EstimateReport slope;
  std::vector<double> levels;
  std::vector<double> median_delta;
  std::size_t dropped_replicas = 0;
};
TreeDeltaExponent tree_delta_exponent(const OffspringLaw& law,
                                      const BiasSpec& bias,
                                      const std::vector<std::int64_t>& levels,
                                      std::size_t replicas, std::int64_t budget,
                                      SeedTree seeds, unsigned workers = 0);

// Monte Carlo evaluation of the explicit speed formula
//   v = E[(Z - 1/beta) e_0 / (1/beta - 1 + sum_{i=0..Z} e_i)]
//     / E[(Z + 1/beta) e_0 / (1/beta - 1 + sum_{i=0..Z} e_i)],
// with each escape probability e_i estimated as the chance that a fresh
// walk escapes to depth D before returning to the root of an independent
// unconditioned tree.
struct AidekonSpeed {
  EstimateReport estimate;
  double exact_simple_walk;  // E[(Z-1)/(Z+1)] from the pmf
  bool undersampled = false; // inner trials below 100
  std::size_t skipped = 0;   // replicas with a nonpositive bracket
};
AidekonSpeed aidekon_speed(const OffspringLaw& law, double beta,
                           int depth_cutoff, std::size_t replicas,
                           std::size_t inner_trials, SeedTree seeds,
                           unsigned workers = 0);

// Hitting-time statistics along the exponential subsequences
// n_lambda(k) = floor(lambda * f'(q)^(-k)). For each lambda track, the
// replica samples of delta_n / n^(1/alpha) per k, with KS distances between
// consecutive k (stability along the subsequence) and across lambda values
// at the top k (instability off-subsequence).
struct LatticeTrack {
  double lambda = 0.0;
  std::vector<std::int64_t> levels;
  std::vector<std::vector<double>> scaled;  // per k: replica samples
  std::vector<double> cross_k_ks;           // KS(k, k+1)
};
struct LatticeDiagnostic {
  double alpha = 0.0;
  std::vector<LatticeTrack> tracks;
  std::vector<double> cross_lambda_ks;  // KS between top-k samples of tracks
  std::size_t censored = 0;             // replicas that hit the budget
};
LatticeDiagnostic lattice_diagnostic(const OffspringLaw& law, double beta,
                                     int k_max,
                                     const std::vector<double>& lambdas,
                                     std::size_t replicas, std::int64_t budget,
                                     SeedTree seeds, unsigned workers = 0);

// delta_n samples for the randomly biased walk (censored draws = +inf).
std::vector<double> random_bias_delta_samples(const OffspringLaw& law,
                                              const BiasLaw& nu,
                                              std::int64_t level,
                                              std::size_t replicas,
                                              std::int64_t budget,
                                              SeedTree seeds,
                                              unsigned workers = 0);

// Empirical survival P[H >= n] of the height of a finite GW tree sampled
// by its population process (capped at n_max). Works for any law; used with
// the Harris trap component.
struct HeightTailEstimate {
  std::vector<double> survival;  // index n = 0..n_max
  std::size_t trees = 0;
};
HeightTailEstimate gw_height_tail(const OffspringLaw& law, int n_max,
                                  std::size_t trees, SeedTree seeds,
                                  unsigned workers = 0);

// Exact height survival u_n = P[H >= n] by generating-function recursion:
// u_0 = 1, u_{n+1} = 1 - f(1 - u_n).
std::vector<double> gw_height_survival_exact(const OffspringLaw& law,
                                             int n_max);

}  // namespace rwlab
