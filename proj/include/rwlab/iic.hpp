#pragma once

#include <cstdint>
#include <vector>

#include "rwlab/offspring.hpp"
#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"

namespace rwlab {

// Critical offspring law: mean exactly 1 (tolerance 1e-12) with positive
// variance. The size-biased companion k p_k drives the spine.
class CriticalLaw {
 public:
  explicit CriticalLaw(OffspringLaw law);

  const OffspringLaw& law() const { return law_; }
  const OffspringLaw& size_biased() const { return size_biased_; }
  double variance() const { return variance_; }

 private:
  OffspringLaw law_;
  OffspringLaw size_biased_;
  double variance_;
};

// The incipient infinite cluster of a critical GW tree via its spinal
// decomposition: an infinite non-branching spine whose vertices carry
// size-biased offspring counts; one uniformly chosen child continues the
// spine, the others root independent critical bud trees. Grown lazily,
// confined to one replica.
class SpineIIC {
 public:
  static constexpr std::size_t kDefaultNodeCap = 10'000'000;

  SpineIIC(CriticalLaw law, SeedTree seeds,
           std::size_t node_cap = kDefaultNodeCap);

  std::int32_t root() const { return 0; }
  std::int32_t parent(std::int32_t v) const { return parent_[v]; }
  std::pair<std::int32_t, std::int32_t> children(std::int32_t v);  // lazy
  bool on_spine(std::int32_t v) const { return spine_pos_[v] >= 0; }
  // Spine projection: the index of the spine ancestor.
  std::int32_t pi(std::int32_t v) const { return pi_[v]; }
  std::int32_t depth(std::int32_t v) const { return depth_[v]; }

  std::size_t node_count() const { return parent_.size(); }
  bool aborted() const { return aborted_; }
  const CriticalLaw& law() const { return law_; }

 private:
  std::int32_t add_node(std::int32_t parent, std::int32_t spine_pos);

  CriticalLaw law_;
  Stream stream_;
  std::size_t node_cap_;
  bool aborted_ = false;

  std::vector<std::int32_t> parent_, depth_, pi_;
  std::vector<std::int32_t> first_child_, n_children_;
  std::vector<std::int32_t> spine_pos_;  // -1 off spine
};

// Empirical bud-height tail against the critical asymptote (2/Var Z) / n.
struct CriticalHeightTail {
  std::vector<int> n_grid;
  std::vector<double> survival;            // P_hat[H >= n]
  std::vector<double> n_times_survival;    // n * P_hat[H >= n]
  double asymptote_constant;               // 2 / Var(Z)
  std::size_t trees;
};
CriticalHeightTail critical_height_tail(const CriticalLaw& law,
                                        const std::vector<int>& n_grid,
                                        std::size_t trees, SeedTree seeds,
                                        unsigned workers = 0);

// Biased walk on the IIC at horizons e^{a n}, e^{b n}, run by the batched
// episode engine (exact in distribution; see IicBiasedWalker). Reports the
// extremal-aging indicator P[pi(X_{e^{an}}) = pi(X_{e^{bn}})] and the
// per-replica profiles ln Delta_{floor(n t)} / (n ln beta) on the t grid.
struct IicBiasedResult {
  double aging_p_hat = 0.0;
  double aging_std_error = 0.0;
  double a_over_b = 0.0;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> profiles;  // one row per replica
  std::size_t replicas = 0;
};
IicBiasedResult biased_walk_iic(const CriticalLaw& law, double beta, double a,
                                double b, int n,
                                const std::vector<double>& t_grid,
                                std::size_t replicas, SeedTree seeds,
                                unsigned workers = 0);

// Spine projection pi(X_t) at the requested times, by naive stepping
// (small horizons; the cross-check reference for the batched engine).
std::vector<std::int32_t> iic_biased_pi_stepped(const CriticalLaw& law,
                                                double beta,
                                                const std::vector<double>& times,
                                                SeedTree seeds);

// Same observable from the batched engine.
std::vector<std::int32_t> iic_biased_pi_batched(const CriticalLaw& law,
                                                double beta,
                                                const std::vector<double>& times,
                                                SeedTree seeds);

// One excursion duration of the beta-biased walk into a fresh critical bud
// (enter once, return to the spine vertex), sampled by the batched engine.
// The reported height covers the walk-visited part of the bud.
struct TrapExcursion {
  double duration;
  int height;  // height of the visited region
};
TrapExcursion iic_trap_excursion(const CriticalLaw& law, double beta,
                                 SeedTree seeds);

// Displacement exponent of the simple random walk on the IIC: slope of
// ln median|X_n| over the step grid.
struct IicDisplacement {
  EstimateReport slope;
  std::vector<double> n_grid;
  std::vector<double> median_disp;
};
IicDisplacement simple_walk_iic(const CriticalLaw& law,
                                const std::vector<std::int64_t>& n_grid,
                                std::size_t replicas, SeedTree seeds,
                                unsigned workers = 0);

// Displacement exponent of the beta-biased walk by naive stepping (the
// logarithmic-displacement negative control).
IicDisplacement biased_walk_iic_displacement(
    const CriticalLaw& law, double beta,
    const std::vector<std::int64_t>& n_grid, std::size_t replicas,
    SeedTree seeds, unsigned workers = 0);

}  // namespace rwlab
