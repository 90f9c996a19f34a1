#include "rwlab/heavy_tail.hpp"

#include <cmath>
#include <limits>

namespace rwlab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kHalfPi = kPi / 2.0;

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                          (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double arcsine_cdf(double alpha, double x) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("arcsine_cdf: alpha must be in (0,1)");
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("arcsine_cdf: x must be in [0,1]");
  return regularized_incomplete_beta(alpha, 1.0 - alpha, x);
}

std::pair<double, double> normalizing_sequences(const TailSpec& spec,
                                                std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("normalizing_sequences: n >= 1");
  const double nn = static_cast<double>(n);
  const double a_n = spec.scale * std::pow(nn, 1.0 / spec.alpha);
  double b_n = 0.0;
  if (spec.alpha > 1.0) {
    // n E[X 1{X <= a_n}] = n * alpha/(alpha-1) * scale * (1 - n^((1-alpha)/alpha))
    b_n = nn * spec.alpha / (spec.alpha - 1.0) * spec.scale *
          (1.0 - std::pow(nn, (1.0 - spec.alpha) / spec.alpha));
  } else if (spec.alpha == 1.0) {
    b_n = nn * spec.scale * std::log(nn);
  }
  return {a_n, b_n};
}

double sample_stable(const StableParams& params, Stream& stream) {
  const double alpha = params.alpha;
  const double kappa = params.kappa;
  const double u = kPi * (stream.u01_open() - 0.5);  // uniform on (-pi/2, pi/2)
  const double w = stream.exponential();

  double x;
  if (alpha == 1.0) {
    const double bu = kHalfPi + kappa * u;
    x = (bu * std::tan(u) -
         kappa * std::log((kHalfPi * w * std::cos(u)) / bu)) /
        kHalfPi;
    // scale sigma = b carries the extra logarithmic drift at alpha = 1
    const double sigma = params.b;
    double y = sigma * x;
    if (kappa != 0.0 && sigma > 0.0) y += 2.0 / kPi * kappa * sigma * std::log(sigma);
    return y + params.c;
  }

  const double ta = kappa * std::tan(kHalfPi * alpha);
  const double b0 = std::atan(ta) / alpha;
  const double s = std::pow(1.0 + ta * ta, 0.5 / alpha);
  x = s * std::sin(alpha * (u + b0)) / std::pow(std::cos(u), 1.0 / alpha) *
      std::pow(std::cos(u - alpha * (u + b0)) / w, (1.0 - alpha) / alpha);
  return std::pow(params.b, 1.0 / alpha) * x + params.c;
}

double sample_stable_ca(double alpha, Stream& stream) {
  if (!(alpha > 0.0) || alpha > 2.0)
    throw std::invalid_argument("sample_stable_ca: alpha must be in (0,2]");
  return sample_stable(StableParams(alpha, 1.0), stream);
}

}  // namespace rwlab
