#include "rwlab/rwre1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwlab/heavy_tail.hpp"
#include "rwlab/parallel.hpp"

namespace rwlab {

namespace {
constexpr double kMomentTol = 1e-12;
}

SiteLaw::SiteLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("SiteLaw: no atoms");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.omega > 0.0) || !(a.omega < 1.0))
      throw std::invalid_argument("SiteLaw: omega atoms must lie in (0,1)");
    if (!(a.prob > 0.0)) throw std::invalid_argument("SiteLaw: prob must be > 0");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("SiteLaw: probabilities must sum to 1");
  for (auto& a : atoms_) a.prob /= total;
  cdf_.reserve(atoms_.size());
  double acc = 0.0;
  for (const auto& a : atoms_) {
    acc += a.prob;
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

double SiteLaw::e_ln_rho() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.prob * std::log((1.0 - a.omega) / a.omega);
  return s;
}

double SiteLaw::e_rho_pow(double t) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    s += a.prob * std::pow((1.0 - a.omega) / a.omega, t);
  return s;
}

double SiteLaw::max_rho() const {
  double m = 0.0;
  for (const auto& a : atoms_) m = std::max(m, (1.0 - a.omega) / a.omega);
  return m;
}

bool SiteLaw::ln_rho_lattice(double* span) const {
  // Collect nonzero |ln rho| values; the law is lattice when all of them are
  // integer multiples of a common span (gcd over reals up to tolerance).
  std::vector<double> logs;
  for (const auto& a : atoms_) {
    const double l = std::log((1.0 - a.omega) / a.omega);
    if (std::abs(l) > 1e-12) logs.push_back(std::abs(l));
  }
  if (logs.empty()) return true;  // degenerate: all rho = 1
  double g = logs[0];
  for (std::size_t i = 1; i < logs.size(); ++i) {
    double a = std::max(g, logs[i]), b = std::min(g, logs[i]);
    while (b > 1e-9) {
      double r = std::fmod(a, b);
      if (r > b - 1e-9) r = 0.0;  // wrapped around: divisible at tolerance
      a = b;
      b = r;
    }
    g = a;
  }
  // incommensurable atoms drive the gcd toward 0; require a sensible span
  if (g < 1e-6) return false;
  for (double l : logs) {
    const double k = std::round(l / g);
    if (std::abs(l - k * g) > 1e-9 * std::max(1.0, k)) return false;
  }
  if (span) *span = g;
  return true;
}

double SiteLaw::sample_omega(Stream& stream) const {
  const double u = stream.u01();
  for (std::size_t i = 0; i < cdf_.size(); ++i)
    if (u <= cdf_[i]) return atoms_[i].omega;
  return atoms_.back().omega;
}

RegimeReport classify_regime(const SiteLaw& law) {
  RegimeReport rep{};
  double e_ln = law.e_ln_rho();
  const SiteLaw* effective = &law;
  std::optional<SiteLaw> mirrored;
  if (e_ln > kMomentTol) {
    // transient to -infinity: mirror the law (omega -> 1 - omega)
    std::vector<SiteLaw::Atom> atoms;
    for (const auto& a : law.atoms()) atoms.push_back({1.0 - a.omega, a.prob});
    mirrored.emplace(std::move(atoms));
    effective = &*mirrored;
    e_ln = effective->e_ln_rho();
    rep.mirrored = true;
  }
  if (std::abs(e_ln) <= kMomentTol) {
    rep.regime = Regime::recurrent;
    return rep;
  }
  const double e_rho = effective->e_rho();
  if (e_rho >= 1.0) {
    rep.regime = Regime::transient_zero_speed;
    return rep;
  }
  rep.regime = Regime::ballistic;
  rep.speed = (1.0 - e_rho) / (1.0 + e_rho);
  return rep;
}

std::optional<double> kks_alpha(const SiteLaw& law) {
  if (law.e_ln_rho() >= -kMomentTol)
    throw std::invalid_argument("kks_alpha: requires E[ln rho] < 0");
  if (law.max_rho() <= 1.0) return std::nullopt;  // E[rho^t] < 1 for all t > 0

  // E[rho^t] - 1 is strictly convex, negative near 0+, -> +inf; bracket and
  // bisect the unique positive root.
  auto fn = [&](double t) { return law.e_rho_pow(t) - 1.0; };
  double hi = 1.0;
  while (fn(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("kks_alpha: failed to bracket root");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fn(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14) break;
  }
  return 0.5 * (lo + hi);
}

Env1D::Env1D(SiteLaw law, SeedTree seeds)
    : law_(std::move(law)), seeds_(seeds) {}

void Env1D::extend_to(std::int64_t x) {
  if (x >= 0) {
    while (static_cast<std::int64_t>(omega_right_.size()) <= x) {
      const std::int64_t site = static_cast<std::int64_t>(omega_right_.size());
      Stream s = seeds_.child_signed(site).stream();
      omega_right_.push_back(law_.sample_omega(s));
      if (site >= 1) {
        const double prev = site == 1 ? 0.0 : v_right_[site - 2];
        const double lr = std::log((1.0 - omega_right_[site]) / omega_right_[site]);
        v_right_.push_back(prev + lr);  // V(site) = V(site-1) + ln rho_site
      }
    }
  } else {
    extend_to(0);  // V(-1) needs rho_0
    while (static_cast<std::int64_t>(omega_left_.size()) < -x) {
      const std::int64_t site =
          -static_cast<std::int64_t>(omega_left_.size()) - 1;
      Stream s = seeds_.child_signed(site).stream();
      omega_left_.push_back(law_.sample_omega(s));
      // V(site) = V(site+1) - ln rho_{site+1}
      const double w_next = site + 1 == 0
                                ? omega_right_[0]
                                : omega_left_[static_cast<std::size_t>(-site - 2)];
      const double prev =
          site == -1 ? 0.0 : v_left_[static_cast<std::size_t>(-site - 2)];
      v_left_.push_back(prev - std::log((1.0 - w_next) / w_next));
    }
  }
}

double Env1D::omega(std::int64_t x) {
  extend_to(x);
  return x >= 0 ? omega_right_[static_cast<std::size_t>(x)]
                : omega_left_[static_cast<std::size_t>(-x - 1)];
}

double Env1D::rho(std::int64_t x) {
  const double w = omega(x);
  return (1.0 - w) / w;
}

double Env1D::potential(std::int64_t x) {
  if (x == 0) return 0.0;
  extend_to(x);
  return x >= 1 ? v_right_[static_cast<std::size_t>(x - 1)]
                : v_left_[static_cast<std::size_t>(-x - 1)];
}

RwreRecord simulate_rwre(Env1D& env, std::int64_t n_levels, Stream& stream,
                         std::int64_t step_cap) {
  RwreRecord rec;
  rec.delta.assign(static_cast<std::size_t>(n_levels), -1);
  std::int64_t x = 0;
  std::int64_t best = 0;
  for (std::int64_t step = 1; step <= step_cap; ++step) {
    x += stream.u01() <= env.omega(x) ? 1 : -1;
    if (x > best) {
      best = x;
      rec.delta[static_cast<std::size_t>(best - 1)] = step;
      if (best == n_levels) {
        rec.steps = step;
        rec.final_position = x;
        return rec;
      }
    }
  }
  rec.partial = true;
  rec.steps = step_cap;
  rec.final_position = x;
  return rec;
}

std::int64_t walk_position_after(Env1D& env, std::int64_t n_steps,
                                 Stream& stream) {
  std::int64_t x = 0;
  for (std::int64_t i = 0; i < n_steps; ++i)
    x += stream.u01() <= env.omega(x) ? 1 : -1;
  return x;
}

std::vector<Valley> potential_valleys(Env1D& env, std::int64_t window) {
  std::vector<Valley> out;
  if (window <= 0) return out;
  std::int64_t ladder = 0;
  double floor_v = env.potential(0);
  double peak = 0.0;
  for (std::int64_t x = 1; x < window; ++x) {
    const double v = env.potential(x);
    if (v < floor_v) {
      out.push_back({ladder, x, peak});
      ladder = x;
      floor_v = v;
      peak = 0.0;
    } else {
      peak = std::max(peak, v - floor_v);
    }
  }
  out.push_back({ladder, window, peak});
  return out;
}

RwreAging aging_rwre(const SiteLaw& law, double h, double t, double eta,
                     std::size_t replicas, SeedTree seeds, unsigned workers) {
  if (!(h >= 1.0)) throw std::invalid_argument("aging_rwre: h >= 1 required");
  if (!(eta > 0.0)) throw std::invalid_argument("aging_rwre: eta > 0 required");
  RwreAging rep;
  rep.replicas = replicas;
  rep.lattice_flagged = law.ln_rho_lattice();
  const auto alpha = kks_alpha(law);
  if (alpha && *alpha < 1.0) rep.arcsine_ref = arcsine_cdf(*alpha, 1.0 / h);
  if (h == 1.0) {
    rep.p_hat = 1.0;
    return rep;
  }

  const std::int64_t t1 = static_cast<std::int64_t>(t);
  const std::int64_t t2 = static_cast<std::int64_t>(t * h);
  const double window = eta * std::log(t);
  auto hits = parallel_replicas<char>(
      replicas,
      [&](std::size_t r) -> char {
        SeedTree rep_seed = seeds.child(r);
        Env1D env(law, rep_seed.child(0));
        Stream walk = rep_seed.child(1).stream();
        std::int64_t x = 0, x_t1 = 0;
        for (std::int64_t step = 1; step <= t2; ++step) {
          x += walk.u01() <= env.omega(x) ? 1 : -1;
          if (step == t1) x_t1 = x;
        }
        return std::llabs(x - x_t1) <= window ? 1 : 0;
      },
      workers);

  std::size_t same = 0;
  for (char c : hits) same += static_cast<std::size_t>(c);
  rep.p_hat = static_cast<double>(same) / static_cast<double>(replicas);
  rep.std_error =
      std::sqrt(rep.p_hat * (1.0 - rep.p_hat) / static_cast<double>(replicas));
  return rep;
}

}  // namespace rwlab
