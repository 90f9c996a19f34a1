#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rwlab/heavy_tail.hpp"
#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"

namespace rwlab {

// Site-indexed trap strengths tau_x over Z, generated lazily and memoized:
// revisits always see the same mean waiting time. Each site draws from its
// own seed path, so generation order is immaterial.
class TrapLandscape {
 public:
  static TrapLandscape pareto(const TailSpec& tail, SeedTree seeds) {
    TrapLandscape l(seeds);
    l.tail_ = tail;
    return l;
  }
  static TrapLandscape constant(double tau) {
    TrapLandscape l{SeedTree(0)};
    l.const_tau_ = tau;
    return l;
  }

  double tau(std::int64_t site) {
    if (!tail_) return const_tau_;
    auto it = memo_.find(site);
    if (it != memo_.end()) return it->second;
    Stream s = seeds_.child_signed(site).stream();
    const double value = sample_pareto(*tail_, s);
    memo_.emplace(site, value);
    return value;
  }

  const std::optional<TailSpec>& tail() const { return tail_; }

 private:
  explicit TrapLandscape(SeedTree seeds) : seeds_(seeds) {}
  std::optional<TailSpec> tail_;
  double const_tau_ = 1.0;
  SeedTree seeds_;
  std::unordered_map<std::int64_t, double> memo_;
};

constexpr double kTotallyDirected = std::numeric_limits<double>::infinity();

// Embedded walk Y_n plus clock S(n) = sum_{i<n} tau_{Y_i} e_i. The
// continuous-time position is X_t = Y_n for t in [S(n), S(n+1)).
struct ClockedTrajectory {
  std::vector<std::int64_t> positions;  // Y_0 .. Y_n
  std::vector<double> clock;            // S(0) = 0 .. S(n)

  std::int64_t position_at(double t) const;
  std::size_t steps() const { return positions.size() - 1; }
};

// Runs the beta-biased trap model for n_steps jumps. beta = infinity is the
// totally directed model (deterministic +1 steps); beta must exceed 1
// otherwise (directed regime only).
ClockedTrajectory simulate_btm(TrapLandscape& landscape, double beta,
                               std::size_t n_steps, Stream& stream);

// Runs until the clock first exceeds t_max (so positions are defined for
// every t <= t_max).
ClockedTrajectory simulate_btm_until(TrapLandscape& landscape, double beta,
                                     double t_max, Stream& stream);

struct BtmScaling {
  EstimateReport slope;           // displacement exponent (target: tail alpha)
  std::vector<double> t_grid;
  std::vector<double> median_x;   // median of X_t across replicas
};

// Displacement exponent: median of X_t over replicas on a geometric t-grid,
// slope of ln median vs ln t with a bootstrap CI. Fresh landscape per
// replica (annealed law). tail = nullopt means tau == 1 (ballistic control).
BtmScaling scaling_exponent_btm(const std::optional<TailSpec>& tail,
                                double beta, const std::vector<double>& t_grid,
                                std::size_t replicas, SeedTree seeds,
                                unsigned workers = 0);

struct AgingEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  double arcsine_ref = 0.0;  // arcsine_cdf(alpha, a/b) when alpha in (0,1)
  std::size_t replicas = 0;
};

// Two-time probability P[X_{a t} = X_{b t}] at horizon t, reported with the
// arcsine prediction at a/b.
AgingEstimate aging_probability(const TailSpec& tail, double beta, double a,
                                double b, double t, std::size_t replicas,
                                SeedTree seeds, unsigned workers = 0);

struct ClockVsStable {
  double ks = 1.0;
  std::size_t replicas = 0;
};

// Two-sample KS between S(n)/n^(1/alpha) over replicas and fresh draws of
// the completely asymmetric stable law, both rescaled by their medians (the
// limit carries an unknown scale constant). tail = nullopt is the tau == 1
// negative control, compared against the reference alpha.
ClockVsStable clock_vs_stable(const std::optional<TailSpec>& tail,
                              double reference_alpha, std::size_t n,
                              std::size_t replicas, SeedTree seeds,
                              unsigned workers = 0);

}  // namespace rwlab
