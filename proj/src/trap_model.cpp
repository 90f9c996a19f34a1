#include "rwlab/trap_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwlab/parallel.hpp"

namespace rwlab {

namespace {

void check_beta(double beta) {
  if (!(beta > 1.0))
    throw std::invalid_argument("simulate_btm: beta must be > 1 or infinite");
}

TrapLandscape make_landscape(const std::optional<TailSpec>& tail,
                             SeedTree seeds) {
  return tail ? TrapLandscape::pareto(*tail, seeds)
              : TrapLandscape::constant(1.0);
}

}  // namespace

std::int64_t ClockedTrajectory::position_at(double t) const {
  if (t < 0.0 || clock.empty() || t >= clock.back())
    throw std::out_of_range("position_at: time outside recorded horizon");
  // index n with S(n) <= t < S(n+1)
  const auto it = std::upper_bound(clock.begin(), clock.end(), t);
  const std::size_t n = static_cast<std::size_t>(it - clock.begin()) - 1;
  return positions[n];
}

ClockedTrajectory simulate_btm(TrapLandscape& landscape, double beta,
                               std::size_t n_steps, Stream& stream) {
  check_beta(beta);
  const bool directed = std::isinf(beta);
  const double p_right = directed ? 1.0 : beta / (beta + 1.0);

  ClockedTrajectory traj;
  traj.positions.reserve(n_steps + 1);
  traj.clock.reserve(n_steps + 1);
  std::int64_t y = 0;
  double s = 0.0;
  traj.positions.push_back(y);
  traj.clock.push_back(s);
  for (std::size_t i = 0; i < n_steps; ++i) {
    s += landscape.tau(y) * stream.exponential();
    if (directed || stream.u01() <= p_right)
      ++y;
    else
      --y;
    traj.positions.push_back(y);
    traj.clock.push_back(s);
  }
  return traj;
}

ClockedTrajectory simulate_btm_until(TrapLandscape& landscape, double beta,
                                     double t_max, Stream& stream) {
  check_beta(beta);
  const bool directed = std::isinf(beta);
  const double p_right = directed ? 1.0 : beta / (beta + 1.0);

  ClockedTrajectory traj;
  std::int64_t y = 0;
  double s = 0.0;
  traj.positions.push_back(y);
  traj.clock.push_back(s);
  while (s <= t_max) {
    s += landscape.tau(y) * stream.exponential();
    if (directed || stream.u01() <= p_right)
      ++y;
    else
      --y;
    traj.positions.push_back(y);
    traj.clock.push_back(s);
  }
  return traj;
}

BtmScaling scaling_exponent_btm(const std::optional<TailSpec>& tail,
                                double beta, const std::vector<double>& t_grid,
                                std::size_t replicas, SeedTree seeds,
                                unsigned workers) {
  if (replicas < 100)
    throw std::invalid_argument(
        "scaling_exponent_btm: need >= 100 replicas for a usable CI");
  if (t_grid.size() < 3)
    throw std::invalid_argument("scaling_exponent_btm: t_grid too short");
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());

  auto rows = parallel_replicas<std::vector<double>>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        TrapLandscape land = make_landscape(tail, rep.child(0));
        Stream walk = rep.child(1).stream();
        const auto traj = simulate_btm_until(land, beta, t_max, walk);
        std::vector<double> xs(t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i)
          xs[i] = static_cast<double>(traj.position_at(t_grid[i]));
        return xs;
      },
      workers);

  BtmScaling out;
  out.t_grid = t_grid;
  out.median_x.resize(t_grid.size());
  std::vector<double> col(replicas);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for (std::size_t r = 0; r < replicas; ++r) col[r] = rows[r][i];
    out.median_x[i] = median(col);
  }
  Stream boot = seeds.child(0x626f6f74).stream();
  out.slope = loglog_slope_of_medians(t_grid, rows, 1000, boot);
  return out;
}

AgingEstimate aging_probability(const TailSpec& tail, double beta, double a,
                                double b, double t, std::size_t replicas,
                                SeedTree seeds, unsigned workers) {
  if (!(a > 0.0) || a > b)
    throw std::invalid_argument("aging_probability: need 0 < a <= b");
  AgingEstimate est;
  est.replicas = replicas;
  if (tail.alpha < 1.0) est.arcsine_ref = arcsine_cdf(tail.alpha, a / b);
  if (a == b) {
    est.p_hat = 1.0;  // same time, same site
    return est;
  }

  auto hits = parallel_replicas<char>(
      replicas,
      [&](std::size_t r) -> char {
        SeedTree rep = seeds.child(r);
        TrapLandscape land = TrapLandscape::pareto(tail, rep.child(0));
        Stream walk = rep.child(1).stream();
        const auto traj = simulate_btm_until(land, beta, b * t, walk);
        return traj.position_at(a * t) == traj.position_at(b * t) ? 1 : 0;
      },
      workers);

  std::size_t same = 0;
  for (char h : hits) same += static_cast<std::size_t>(h);
  est.p_hat = static_cast<double>(same) / static_cast<double>(replicas);
  est.std_error =
      std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(replicas));
  return est;
}

ClockVsStable clock_vs_stable(const std::optional<TailSpec>& tail,
                              double reference_alpha, std::size_t n,
                              std::size_t replicas, SeedTree seeds,
                              unsigned workers) {
  const double alpha = tail ? tail->alpha : reference_alpha;
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("clock_vs_stable: alpha must be in (0,1)");

  auto sn = parallel_replicas<double>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        TrapLandscape land = make_landscape(tail, rep.child(0));
        Stream walk = rep.child(1).stream();
        const auto traj = simulate_btm(land, kTotallyDirected, n, walk);
        return traj.clock.back() /
               std::pow(static_cast<double>(n), 1.0 / alpha);
      },
      workers);

  std::vector<double> ref(replicas);
  {
    Stream s = seeds.child(0x73746162).stream();
    for (auto& v : ref) v = sample_stable_ca(reference_alpha, s);
  }
  const double m_sn = median(sn);
  const double m_ref = median(ref);
  for (auto& v : sn) v /= m_sn;
  for (auto& v : ref) v /= m_ref;

  ClockVsStable out;
  out.replicas = replicas;
  out.ks = ks_two_sample(std::move(sn), std::move(ref));
  return out;
}

}  // namespace rwlab
