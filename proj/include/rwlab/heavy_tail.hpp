#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "rwlab/seed_tree.hpp"

namespace rwlab {

// Exact Pareto tail P[X > x] = (x/scale)^(-alpha) for x >= scale. The
// canonical heavy-tailed trap law: every limit statement exercised by the
// simulators depends on the tail only, and the exact form admits closed-form
// oracles (quantiles, truncated means, normalizing sequences).
struct TailSpec {
  double alpha;
  double scale;

  explicit TailSpec(double alpha_, double scale_ = 1.0)
      : alpha(alpha_), scale(scale_) {
    if (!(alpha > 0.0)) throw std::invalid_argument("TailSpec: alpha must be > 0");
    if (!(scale > 0.0)) throw std::invalid_argument("TailSpec: scale must be > 0");
  }

  double survival(double x) const {
    if (x <= scale) return 1.0;
    return std::pow(x / scale, -alpha);
  }

  // Inverse-CDF transform; u in (0,1], u = 1 maps to the support boundary.
  double from_uniform(double u) const { return scale * std::pow(u, -1.0 / alpha); }
};

inline double sample_pareto(const TailSpec& spec, Stream& stream) {
  return spec.from_uniform(stream.u01());
}

// Stable-law parameters in the characteristic-function form
//   E exp(i t S) = exp(i t c - b |t|^alpha (1 + i kappa sgn(t) w_alpha(t))),
//   w_alpha(t) = -tan(pi alpha / 2) for alpha != 1, (2/pi) log|t| for alpha = 1.
// kappa = +/-1 is the completely asymmetric case; alpha = 2, b = 1 is the
// normal law with variance 2.
struct StableParams {
  double alpha;
  double kappa;
  double b = 1.0;
  double c = 0.0;

  StableParams(double alpha_, double kappa_, double b_ = 1.0, double c_ = 0.0)
      : alpha(alpha_), kappa(kappa_), b(b_), c(c_) {
    if (!(alpha > 0.0) || alpha > 2.0)
      throw std::invalid_argument("StableParams: alpha must be in (0,2]");
    if (std::abs(kappa) > 1.0)
      throw std::invalid_argument("StableParams: |kappa| <= 1 required");
    if (b < 0.0) throw std::invalid_argument("StableParams: b >= 0 required");
  }

  bool completely_asymmetric() const { return kappa == 1.0 || kappa == -1.0; }
};

// Chambers-Mallows-Stuck transformation. Draws are exact for every
// parameter tuple above; the alpha = 1 branch uses the log form.
double sample_stable(const StableParams& params, Stream& stream);

// Standard completely asymmetric draw (kappa = 1, b = 1, c = 0); strictly
// positive support when alpha < 1.
double sample_stable_ca(double alpha, Stream& stream);

// Normalizing sequences for sums of i.i.d. Pareto variables:
//   a_n = inf { x : P[|X| > x] <= 1/n },  b_n = n E[X 1{|X| <= a_n}],
// with b_n = 0 chosen when alpha < 1 (no recentering is needed there).
// Evaluated in closed form.
std::pair<double, double> normalizing_sequences(const TailSpec& spec,
                                                std::uint64_t n);

// Generalized arcsine distribution function with parameter alpha in (0,1):
//   F(x) = sin(alpha pi)/pi * Integral_0^x y^(alpha-1) (1-y)^(-alpha) dy,
// i.e. the regularized incomplete beta I_x(alpha, 1-alpha), evaluated by
// continued fraction to absolute accuracy ~1e-14 (integrand is singular at
// both endpoints, so quadrature is kept for tests only).
double arcsine_cdf(double alpha, double x);

// Regularized incomplete beta I_x(a, b); exposed for reuse in tests.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace rwlab
