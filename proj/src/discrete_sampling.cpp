#include "rwlab/discrete_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rwlab {

namespace {
// Count ceiling: keeps astronomically deep traps finite in double space
// (otherwise inf counts poison the downstream mixture samplers). Only the
// log scale of such values is ever observed, far below this ceiling.
constexpr double kCountCap = 1e290;
}  // namespace

double sample_geometric_count(double p, Stream& stream) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("geometric: p in (0,1] required");
  if (p == 1.0) return 0.0;
  const double u = stream.u01();  // (0,1]
  return std::min(kCountCap, std::floor(std::log(u) / std::log1p(-p)));
}

double sample_gamma(double shape, Stream& stream) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape > 0 required");
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, stream);
    return g * std::pow(stream.u01(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.u01_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_poisson(double lambda, Stream& stream) {
  if (lambda <= 0.0) return 0.0;
  if (lambda >= 1e18) return std::min(lambda, kCountCap);  // sub-1e-9 spread
  if (lambda <= 500.0) {
    // inversion by sequential search
    const double u = stream.u01_open();
    double p = std::exp(-lambda);
    double cdf = p;
    double k = 0.0;
    const double k_cap = lambda + 12.0 * std::sqrt(lambda) + 30.0;
    while (u > cdf && k < k_cap) {
      k += 1.0;
      p *= lambda / k;
      cdf += p;
    }
    return k;
  }
  const double v = std::round(lambda + std::sqrt(lambda) * stream.normal());
  return std::max(0.0, v);
}

double sample_binomial(double n, double q, Stream& stream) {
  if (n <= 0.0 || q <= 0.0) return 0.0;
  if (q >= 1.0) return n;
  if (q > 0.5) return n - sample_binomial(n, 1.0 - q, stream);
  if (n * q >= 1e18) return std::min(n * q, kCountCap);

  if (n <= 64.0) {
    double k = 0.0;
    const auto ni = static_cast<int>(n);
    for (int i = 0; i < ni; ++i) k += stream.u01() <= q ? 1.0 : 0.0;
    return k;
  }
  const double mean = n * q;
  if (mean <= 300.0) {
    // inversion by sequential search (q <= 1/2 keeps the start term in range)
    const double u = stream.u01_open();
    const double r = q / (1.0 - q);
    double p = std::exp(n * std::log1p(-q));
    double cdf = p;
    double k = 0.0;
    const double k_cap = std::min(n, mean + 12.0 * std::sqrt(mean) + 30.0);
    while (u > cdf && k < k_cap) {
      p *= r * (n - k) / (k + 1.0);
      k += 1.0;
      cdf += p;
    }
    return k;
  }
  const double sd = std::sqrt(n * q * (1.0 - q));
  const double v = std::round(mean + sd * stream.normal());
  return std::clamp(v, 0.0, n);
}

double sample_negative_binomial(double m, double p, Stream& stream) {
  if (m <= 0.0) return 0.0;
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("negative_binomial: p in (0,1] required");
  if (p == 1.0) return 0.0;
  if (m <= 256.0) {
    double total = 0.0;
    const auto mi = static_cast<int>(m);
    for (int i = 0; i < mi; ++i) total += sample_geometric_count(p, stream);
    return total;
  }
  // Gamma-Poisson mixture: K ~ Poisson(Gamma(m) * (1-p)/p) is NB(m, p)
  const double rate = sample_gamma(m, stream) * (1.0 - p) / p;
  return sample_poisson(rate, stream);
}

}  // namespace rwlab
