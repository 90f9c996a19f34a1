#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rwlab/seed_tree.hpp"

namespace rwlab {

// Finite-support offspring pmf (p_0 .. p_K) with its generating function
// f(s) = sum p_k s^k and the usual moments. Doubles throughout; input is
// renormalized and must sum to 1 within 1e-9.
class OffspringLaw {
 public:
  explicit OffspringLaw(std::vector<double> pmf);
  static OffspringLaw from_atoms(
      const std::vector<std::pair<int, double>>& atoms);

  double p(std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
  std::size_t max_k() const { return pmf_.size() - 1; }
  const std::vector<double>& pmf() const { return pmf_; }

  double mean() const { return mean_; }
  double second_moment() const { return second_; }
  double variance() const { return second_ - mean_ * mean_; }
  bool supercritical() const { return mean_ > 1.0; }
  bool has_leaves() const { return pmf_[0] > 0.0; }

  double f(double s) const;
  double f_prime(double s) const;

  int sample(Stream& stream) const;

 private:
  std::vector<double> pmf_, cdf_;
  double mean_ = 0.0, second_ = 0.0;
};

// Smallest fixed point of f in [0,1]: monotone iteration from 0 with a
// Newton polish (tolerance 1e-14). Subcritical/critical laws return 1.
double extinction_prob(const OffspringLaw& law);

// beta_c = 1/f'(q). Leafless laws have no finite critical bias.
std::optional<double> critical_bias(const OffspringLaw& law);

// Harris decomposition of a supercritical law with leaves:
//   g(s) = (f((1-q)s + q) - q) / (1-q)   (leafless backbone law)
//   h(s) = f(q s) / q                    (subcritical trap law)
// by exact polynomial coefficient extraction. For leafless laws g = f and
// h is absent.
struct HarrisSplit {
  OffspringLaw g;
  std::optional<OffspringLaw> h;
};
HarrisSplit harris_split(const OffspringLaw& law);

// alpha = ln(beta_c) / ln(beta), the sub-ballistic exponent on trees with
// leaves. Requires beta > 1.
double alpha_tree(const OffspringLaw& law, double beta);

// CLT variance on leafless trees: sigma^2 = m^2 (m-1) / (sum k^2 p_k - m).
double leafless_sigma2(const OffspringLaw& law);

// Finite-atom law for random edge biases (values > 0).
class BiasLaw {
 public:
  struct Atom {
    double value;
    double prob;
  };
  explicit BiasLaw(std::vector<Atom> atoms);
  static BiasLaw point_mass(double beta) { return BiasLaw({{beta, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  double e_pow(double t) const;     // E[A^t]
  double min_value() const;
  double max_value() const;
  bool log_lattice(double* span = nullptr) const;
  double sample(Stream& stream) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
};

// The root of E_nu[A^alpha] = 1/f'(q) (strictly increasing left side when
// all atoms exceed 1). Bisection to 1e-12; the lattice flag reports whether
// {ln y} spans a lattice (scaling limits degrade there).
struct RandomBiasAlpha {
  double alpha;
  bool log_lattice;
};
RandomBiasAlpha random_bias_alpha(const OffspringLaw& law, const BiasLaw& nu);

// Pipe exponents for randomly biased leafless trees:
//   alpha_1 = Leb{ t >= 0 : E[A^t] <= 1/p_1 },
//   alpha_2 = Leb{ t <= 0 : E[A^t] <= 1/p_1 },  alpha = alpha_1 + alpha_2,
// all infinite when p_1 = 0. E[A^t] is convex so each set is an interval.
struct PipeAlpha {
  double alpha1;
  double alpha2;
  double alpha;
};
PipeAlpha pipe_alpha(const OffspringLaw& law, const BiasLaw& a_law);

// Conditional bud-count law of the Harris construction: given a backbone
// vertex of backbone degree d, the number of attached traps N satisfies
//   P[N = j | deg = d] propto p_{d+j} C(d+j, d) (1-q)^d q^j.
// This is the unique law under which backbone + buds reproduce the original
// offspring law at backbone vertices.
std::vector<double> bud_count_pmf(const OffspringLaw& law, double q, int deg);

// Bundled analytics used by the tree generators.
struct GWAnalytics {
  double q = 0.0;
  double f_prime_q = 0.0;
  std::optional<double> beta_c;
  OffspringLaw g;
  std::optional<OffspringLaw> h;
  std::optional<double> sigma2;
  std::vector<std::vector<double>> bud_cdf_by_deg;  // index d-1

  static GWAnalytics analyze(const OffspringLaw& law);
};

}  // namespace rwlab
