#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"

namespace rwlab {

// Law of a single transition probability omega_0, restricted to finitely
// many atoms in (0,1) so that every moment of rho = (1-omega)/omega is
// available in closed form (exact classification oracles).
class SiteLaw {
 public:
  struct Atom {
    double omega;
    double prob;
  };

  explicit SiteLaw(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double e_ln_rho() const;
  double e_rho_pow(double t) const;
  double e_rho() const { return e_rho_pow(1.0); }
  double max_rho() const;

  // True when the ln(rho) atoms lie on a common lattice (integer-span check
  // with tolerance 1e-9); reported span via out-param when non-degenerate.
  bool ln_rho_lattice(double* span = nullptr) const;

  double sample_omega(Stream& stream) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
};

enum class Regime { recurrent, transient_zero_speed, ballistic };

struct RegimeReport {
  Regime regime;
  double speed = 0.0;   // Solomon speed (0 in the non-ballistic regimes)
  bool mirrored = false; // law was transient to -infinity and mirrored
};

// Solomon trichotomy: recurrent iff E[ln rho] = 0; transient with zero
// speed iff E[ln rho] < 0 and E[rho] >= 1; otherwise ballistic with
// v = (1 - E[rho]) / (1 + E[rho]). Laws transient to -infinity are mirrored
// (omega -> 1-omega) and flagged.
RegimeReport classify_regime(const SiteLaw& law);

// The positive root of E[rho^alpha] = 1 (strictly convex in alpha with
// negative derivative at 0 when E[ln rho] < 0). Bisection to 1e-12.
// Returns nullopt when every rho atom is <= 1 (no root). Throws when
// E[ln rho] >= 0.
std::optional<double> kks_alpha(const SiteLaw& law);

// Quenched environment: per-site omega_x, rho_x and the potential
// V(x) = sum_{1 <= i <= x} ln rho_i (V(0) = 0), extended lazily on both
// sides. Extension is idempotent; sites never change once generated.
class Env1D {
 public:
  Env1D(SiteLaw law, SeedTree seeds);

  double omega(std::int64_t x);
  double rho(std::int64_t x);
  double potential(std::int64_t x);
  const SiteLaw& law() const { return law_; }

 private:
  void extend_to(std::int64_t x);
  SiteLaw law_;
  SeedTree seeds_;
  std::vector<double> omega_right_, omega_left_;  // x >= 0 / x < 0
  std::vector<double> v_right_, v_left_;          // V(1..) / V(-1..)
};

struct RwreRecord {
  std::vector<std::int64_t> delta;  // delta[k-1] = first hitting time of k
  bool partial = false;             // step budget exhausted
  std::int64_t steps = 0;
  std::int64_t final_position = 0;
};

// Nearest-neighbor walk with P[right | at x] = omega_x; records the hitting
// time of each level 1..n_levels. Hard step cap (default 1e9) flags a
// partial record instead of running away in zero-speed regimes.
RwreRecord simulate_rwre(Env1D& env, std::int64_t n_levels, Stream& stream,
                         std::int64_t step_cap = 1'000'000'000);

// Position after a fixed number of steps (speed estimation).
std::int64_t walk_position_after(Env1D& env, std::int64_t n_steps,
                                 Stream& stream);

struct Valley {
  std::int64_t begin = 0;  // ladder site opening the valley
  std::int64_t end = 0;    // site of the next strict descending ladder
  double height = 0.0;     // max uphill climb before exiting toward +inf
};

// Decomposes V over sites [0, window) into excursions above the running
// minimum; the height of each is the climb required to exit the valley
// toward +infinity. The trailing (unfinished) valley is included.
std::vector<Valley> potential_valleys(Env1D& env, std::int64_t window);

struct RwreAging {
  double p_hat = 0.0;
  double std_error = 0.0;
  double arcsine_ref = 0.0;
  std::size_t replicas = 0;
  bool lattice_flagged = false;  // ln rho lattice: limit statement degraded
};

// Empirical P[|X_{t h} - X_t| <= eta ln t] against the arcsine value at 1/h.
RwreAging aging_rwre(const SiteLaw& law, double h, double t, double eta,
                     std::size_t replicas, SeedTree seeds,
                     unsigned workers = 0);

}  // namespace rwlab
