#include "rwlab/offspring.hpp"

#include <algorithm>
#include <cmath>

namespace rwlab {

namespace {

// C(n, k) as double; supports small n only (finite pmfs).
double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

OffspringLaw::OffspringLaw(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw std::invalid_argument("OffspringLaw: empty pmf");
  double total = 0.0;
  for (double p : pmf_) {
    if (p < 0.0) throw std::invalid_argument("OffspringLaw: negative mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("OffspringLaw: pmf must sum to 1");
  for (auto& p : pmf_) p /= total;
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();

  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    acc += pmf_[k];
    cdf_[k] = acc;
    mean_ += static_cast<double>(k) * pmf_[k];
    second_ += static_cast<double>(k) * static_cast<double>(k) * pmf_[k];
  }
  cdf_.back() = 1.0;
}

OffspringLaw OffspringLaw::from_atoms(
    const std::vector<std::pair<int, double>>& atoms) {
  int max_k = 0;
  for (const auto& [k, p] : atoms) {
    if (k < 0) throw std::invalid_argument("OffspringLaw: negative k");
    max_k = std::max(max_k, k);
  }
  std::vector<double> pmf(static_cast<std::size_t>(max_k) + 1, 0.0);
  for (const auto& [k, p] : atoms) pmf[static_cast<std::size_t>(k)] += p;
  return OffspringLaw(std::move(pmf));
}

double OffspringLaw::f(double s) const {
  double r = 0.0;
  for (std::size_t k = pmf_.size(); k-- > 0;) r = r * s + pmf_[k];
  return r;
}

double OffspringLaw::f_prime(double s) const {
  double r = 0.0;
  for (std::size_t k = pmf_.size(); k-- > 1;)
    r = r * s + static_cast<double>(k) * pmf_[k];
  return r;
}

int OffspringLaw::sample(Stream& stream) const {
  const double u = stream.u01();
  for (std::size_t k = 0; k < cdf_.size(); ++k)
    if (u <= cdf_[k]) return static_cast<int>(k);
  return static_cast<int>(cdf_.size() - 1);
}

double extinction_prob(const OffspringLaw& law) {
  if (!law.supercritical()) return 1.0;
  if (!law.has_leaves()) return 0.0;
  double q = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double next = law.f(q);
    if (next - q < 1e-13) {
      q = next;
      break;
    }
    q = next;
  }
  // Newton polish on f(q) - q = 0
  for (int i = 0; i < 4; ++i) {
    const double denom = law.f_prime(q) - 1.0;
    if (std::abs(denom) < 1e-12) break;
    q -= (law.f(q) - q) / denom;
  }
  return std::clamp(q, 0.0, 1.0);
}

std::optional<double> critical_bias(const OffspringLaw& law) {
  if (!law.supercritical())
    throw std::invalid_argument("critical_bias: law must be supercritical");
  if (!law.has_leaves()) return std::nullopt;  // v > 0 for every beta
  const double q = extinction_prob(law);
  return 1.0 / law.f_prime(q);
}

HarrisSplit harris_split(const OffspringLaw& law) {
  if (!law.supercritical())
    throw std::invalid_argument("harris_split: law must be supercritical");
  if (!law.has_leaves()) return {law, std::nullopt};

  const double q = extinction_prob(law);
  const std::size_t K = law.max_k();

  // g_j = [s^j] f((1-q)s + q) / (1-q), j >= 1; g_0 vanishes identically.
  std::vector<double> g(K + 1, 0.0);
  for (std::size_t j = 1; j <= K; ++j) {
    double c = 0.0;
    for (std::size_t k = j; k <= K; ++k)
      c += law.p(k) * binom(static_cast<int>(k), static_cast<int>(j)) *
           std::pow(1.0 - q, static_cast<double>(j)) *
           std::pow(q, static_cast<double>(k - j));
    g[j] = c / (1.0 - q);
  }
  // h_k = p_k q^(k-1)
  std::vector<double> h(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k)
    h[k] = law.p(k) * std::pow(q, static_cast<double>(k) - 1.0);

  return {OffspringLaw(std::move(g)), OffspringLaw(std::move(h))};
}

double alpha_tree(const OffspringLaw& law, double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("alpha_tree: beta must be > 1");
  const auto bc = critical_bias(law);
  if (!bc)
    throw std::invalid_argument("alpha_tree: leafless law has no finite beta_c");
  return std::log(*bc) / std::log(beta);
}

double leafless_sigma2(const OffspringLaw& law) {
  if (law.has_leaves())
    throw std::invalid_argument("leafless_sigma2: law must have p_0 = 0");
  if (!law.supercritical())
    throw std::invalid_argument("leafless_sigma2: law must be supercritical");
  const double m = law.mean();
  return m * m * (m - 1.0) / (law.second_moment() - m);
}

BiasLaw::BiasLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("BiasLaw: no atoms");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.value > 0.0))
      throw std::invalid_argument("BiasLaw: values must be positive");
    if (!(a.prob > 0.0)) throw std::invalid_argument("BiasLaw: prob must be > 0");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("BiasLaw: probabilities must sum to 1");
  for (auto& a : atoms_) a.prob /= total;
  cdf_.reserve(atoms_.size());
  double acc = 0.0;
  for (const auto& a : atoms_) {
    acc += a.prob;
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

double BiasLaw::e_pow(double t) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.prob * std::pow(a.value, t);
  return s;
}

double BiasLaw::min_value() const {
  double m = atoms_[0].value;
  for (const auto& a : atoms_) m = std::min(m, a.value);
  return m;
}

double BiasLaw::max_value() const {
  double m = atoms_[0].value;
  for (const auto& a : atoms_) m = std::max(m, a.value);
  return m;
}

bool BiasLaw::log_lattice(double* span) const {
  std::vector<double> logs;
  for (const auto& a : atoms_) {
    const double l = std::log(a.value);
    if (std::abs(l) > 1e-12) logs.push_back(std::abs(l));
  }
  if (logs.empty()) return true;
  double g = logs[0];
  for (std::size_t i = 1; i < logs.size(); ++i) {
    double x = std::max(g, logs[i]), y = std::min(g, logs[i]);
    while (y > 1e-9) {
      double r = std::fmod(x, y);
      if (r > y - 1e-9) r = 0.0;
      x = y;
      y = r;
    }
    g = x;
  }
  if (g < 1e-6) return false;
  for (double l : logs) {
    const double k = std::round(l / g);
    if (std::abs(l - k * g) > 1e-9 * std::max(1.0, k)) return false;
  }
  if (span) *span = g;
  return true;
}

double BiasLaw::sample(Stream& stream) const {
  const double u = stream.u01();
  for (std::size_t i = 0; i < cdf_.size(); ++i)
    if (u <= cdf_[i]) return atoms_[i].value;
  return atoms_.back().value;
}

RandomBiasAlpha random_bias_alpha(const OffspringLaw& law, const BiasLaw& nu) {
  if (!law.supercritical() || !law.has_leaves())
    throw std::invalid_argument(
        "random_bias_alpha: supercritical law with leaves required");
  if (!(nu.min_value() > 1.0))
    throw std::invalid_argument("random_bias_alpha: nu must live on (1, inf)");
  const double target = 1.0 / law.f_prime(extinction_prob(law));

  // E[A^alpha] is strictly increasing from 1 (< target) to infinity.
  double hi = 1.0;
  while (nu.e_pow(hi) < target) {
    hi *= 2.0;
    if (hi > 1e6)
      throw std::runtime_error("random_bias_alpha: failed to bracket root");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (nu.e_pow(mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14) break;
  }
  return {0.5 * (lo + hi), nu.log_lattice()};
}

PipeAlpha pipe_alpha(const OffspringLaw& law, const BiasLaw& a_law) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double p1 = law.p(1);
  if (p1 == 0.0) return {kInf, kInf, kInf};
  const double target = 1.0 / p1;

  // E[A^t] is convex with E[A^0] = 1 <= target, so the sublevel set is an
  // interval around 0; measure each side, unbounded when the one-sided
  // limit growth never reaches the target (all atoms on one side of 1).
  auto side = [&](double direction) -> double {
    double hi = direction;
    if (a_law.e_pow(hi) <= target) {
      while (std::abs(hi) < 1e6) {
        hi *= 2.0;
        if (a_law.e_pow(hi) > target) break;
      }
      if (a_law.e_pow(hi) <= target) return kInf;
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (a_law.e_pow(mid) <= target)
        lo = mid;
      else
        hi = mid;
      if (std::abs(hi - lo) < 1e-14) break;
    }
    return std::abs(0.5 * (lo + hi));
  };

  const double a1 = side(+1.0);
  const double a2 = side(-1.0);
  return {a1, a2, a1 + a2};
}

std::vector<double> bud_count_pmf(const OffspringLaw& law, double q, int deg) {
  const int K = static_cast<int>(law.max_k());
  if (deg < 1 || deg > K)
    throw std::invalid_argument("bud_count_pmf: deg out of range");
  std::vector<double> w(static_cast<std::size_t>(K - deg) + 1, 0.0);
  double total = 0.0;
  for (int j = 0; j + deg <= K; ++j) {
    const double v = law.p(static_cast<std::size_t>(deg + j)) *
                     binom(deg + j, deg) *
                     std::pow(1.0 - q, static_cast<double>(deg)) *
                     std::pow(q, static_cast<double>(j));
    w[static_cast<std::size_t>(j)] = v;
    total += v;
  }
  if (total <= 0.0)
    throw std::runtime_error("bud_count_pmf: empty conditional law");
  for (auto& v : w) v /= total;
  return w;
}

GWAnalytics GWAnalytics::analyze(const OffspringLaw& law) {
  if (!law.supercritical())
    throw std::invalid_argument("GWAnalytics: law must be supercritical");
  auto split = harris_split(law);
  GWAnalytics a{.q = extinction_prob(law),
                .f_prime_q = 0.0,
                .beta_c = std::nullopt,
                .g = std::move(split.g),
                .h = std::move(split.h),
                .sigma2 = std::nullopt,
                .bud_cdf_by_deg = {}};
  a.f_prime_q = law.f_prime(a.q);
  if (law.has_leaves()) a.beta_c = 1.0 / a.f_prime_q;
  if (!law.has_leaves()) a.sigma2 = leafless_sigma2(law);
  if (law.has_leaves()) {
    for (int d = 1; d <= static_cast<int>(law.max_k()); ++d) {
      auto pmf = bud_count_pmf(law, a.q, d);
      double acc = 0.0;
      for (auto& v : pmf) {
        acc += v;
        v = acc;
      }
      if (!pmf.empty()) pmf.back() = 1.0;
      a.bud_cdf_by_deg.push_back(std::move(pmf));
    }
  }
  return a;
}

}  // namespace rwlab
