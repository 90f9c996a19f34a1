#include "rwlab/stats.hpp"

#include <cmath>
#include <numeric>

namespace rwlab {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

EstimateReport hill_tail_index(std::span<const double> samples,
                               double k_fraction) {
  if (samples.size() < 500)
    throw std::invalid_argument("hill_tail_index: need >= 500 samples");
  if (!(k_fraction > 0.0) || k_fraction > 0.2)
    throw std::invalid_argument("hill_tail_index: k_fraction in (0, 0.2]");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(k_fraction * static_cast<double>(sorted.size())));

  EstimateReport rep;
  rep.method = "hill";
  rep.replicas = samples.size();
  const double x_k1 = sorted[k];  // (k+1)-th order statistic
  if (!(x_k1 > 0.0))
    throw std::invalid_argument("hill_tail_index: nonpositive order statistic");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(sorted[i] / x_k1);
  if (sum <= 0.0) {
    rep.flagged = true;
    rep.flag_note = "ties at the top order statistics";
    throw std::invalid_argument("hill_tail_index: ties at the top");
  }
  rep.estimate = static_cast<double>(k) / sum;
  rep.std_error = rep.estimate / std::sqrt(static_cast<double>(k));
  rep.ci_lo = rep.estimate - 1.96 * rep.std_error;
  rep.ci_hi = rep.estimate + 1.96 * rep.std_error;
  return rep;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need >= 2 aligned points");
  if (!w.empty() && w.size() != x.size())
    throw std::invalid_argument("least_squares: weight size mismatch");

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
    syy += wi * (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate x");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += wi * r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 2 && sxx > 0.0)
    fit.slope_stderr = std::sqrt(ss_res / (static_cast<double>(x.size()) - 2.0) / sxx);
  return fit;
}

EstimateReport loglog_slope(std::span<const double> n,
                            std::span<const double> value,
                            std::span<const double> weights) {
  if (n.size() < 3)
    throw std::invalid_argument("loglog_slope: need >= 3 grid points");
  std::vector<double> lx(n.size()), ly(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(value[i] > 0.0))
      throw std::invalid_argument("loglog_slope: nonpositive point");
    lx[i] = std::log(n[i]);
    ly[i] = std::log(value[i]);
  }
  const LinearFit fit = least_squares(lx, ly, weights);
  EstimateReport rep;
  rep.method = "loglog-ls";
  rep.replicas = n.size();
  rep.estimate = fit.slope;
  rep.std_error = fit.slope_stderr;
  rep.ci_lo = fit.slope - 1.96 * fit.slope_stderr;
  rep.ci_hi = fit.slope + 1.96 * fit.slope_stderr;
  return rep;
}

std::pair<double, double> bootstrap_percentile_ci(
    std::size_t n_items,
    const std::function<double(const std::vector<std::uint32_t>&)>& stat,
    int resamples, Stream& stream) {
  if (n_items == 0) throw std::invalid_argument("bootstrap: no items");
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<std::uint32_t> idx(n_items);
  for (int b = 0; b < resamples; ++b) {
    for (auto& v : idx)
      v = static_cast<std::uint32_t>(stream.below(n_items));
    stats[static_cast<std::size_t>(b)] = stat(idx);
  }
  std::sort(stats.begin(), stats.end());
  return {quantile_sorted(stats, 0.025), quantile_sorted(stats, 0.975)};
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + static_cast<double>(n));
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi_square_pvalue(std::span<const std::int64_t> observed,
                         std::span<const double> expected_probs) {
  if (observed.size() != expected_probs.size() || observed.size() < 2)
    throw std::invalid_argument("chi_square: aligned cells (>= 2) required");
  std::int64_t total = 0;
  for (auto o : observed) total += o;
  double stat = 0.0;
  int df = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_probs[i] * static_cast<double>(total);
    if (e <= 0.0) {
      if (observed[i] != 0)
        throw std::invalid_argument("chi_square: mass observed in a zero cell");
      continue;
    }
    const double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
    ++df;
  }
  if (df < 1) return 1.0;
  return 1.0 - regularized_gamma_p(static_cast<double>(df) / 2.0, stat / 2.0);
}

EstimateReport loglog_slope_of_medians(
    const std::vector<double>& grid,
    const std::vector<std::vector<double>>& rows, int resamples,
    Stream& bootstrap_stream) {
  if (rows.empty()) throw std::invalid_argument("no replicas");
  for (const auto& r : rows)
    if (r.size() != grid.size())
      throw std::invalid_argument("replica row does not match grid");

  auto slope_of = [&](const std::vector<std::uint32_t>* idx) {
    std::vector<double> med(grid.size());
    std::vector<double> col;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      col.clear();
      if (idx) {
        for (auto r : *idx) col.push_back(rows[r][i]);
      } else {
        for (const auto& r : rows) col.push_back(r[i]);
      }
      med[i] = median(col);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (med[i] > 0.0) {
        lx.push_back(std::log(grid[i]));
        ly.push_back(std::log(med[i]));
      }
    }
    if (lx.size() < 3) throw std::runtime_error("too few positive medians");
    return least_squares(lx, ly).slope;
  };

  EstimateReport rep;
  rep.method = "loglog-median-bootstrap";
  rep.replicas = rows.size();
  rep.estimate = slope_of(nullptr);
  auto ci = bootstrap_percentile_ci(
      rows.size(),
      [&](const std::vector<std::uint32_t>& idx) { return slope_of(&idx); },
      resamples, bootstrap_stream);
  rep.ci_lo = ci.first;
  rep.ci_hi = ci.second;
  rep.std_error = (ci.second - ci.first) / (2.0 * 1.96);
  return rep;
}

}  // namespace rwlab
