#pragma once

#include "rwlab/seed_tree.hpp"

namespace rwlab {

// Count samplers used by the batched walk engines. Counts travel as
// doubles: values are exact integers below 2^53 and smooth approximations
// above (the large-count regimes only feed log-scale statistics). Small
// parameters take exact paths; large ones switch to standard asymptotic
// samplers with negligible distributional error at those sizes.

// Number of failures before the first success, P[success] = p.
double sample_geometric_count(double p, Stream& stream);

// Gamma(shape, scale 1), Marsaglia-Tsang (exact for all shapes > 0).
double sample_gamma(double shape, Stream& stream);

double sample_poisson(double lambda, Stream& stream);

// Binomial(n, q) with real-valued n >= 0 (rounded when astronomically
// large; exact inversion or Bernoulli loops otherwise).
double sample_binomial(double n, double q, Stream& stream);

// Number of failures before the m-th success. Exact geometric sums for
// small m; the Gamma-Poisson mixture identity beyond.
double sample_negative_binomial(double m, double p, Stream& stream);

}  // namespace rwlab
