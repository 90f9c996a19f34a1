#include "rwlab/tree_walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwlab/parallel.hpp"

namespace rwlab {

namespace {

// Picks the child index under random bias given u in (0, mark_sum].
std::int32_t pick_marked_child(const TreeArena& tree, std::int32_t first,
                               std::int32_t k, double u) {
  double acc = 0.0;
  for (std::int32_t c = first; c < first + k - 1; ++c) {
    acc += tree.edge_mark(c);
    if (u <= acc) return c;
  }
  return first + k - 1;
}

}  // namespace

namespace {

// Conditioned (harris) growth for supercritical laws; plain growth covers
// the deterministic/critical rays used in controls.
TreeArena make_walk_arena(const OffspringLaw& law, SeedTree seeds,
                          std::optional<BiasLaw> marks = std::nullopt) {
  const auto mode = law.supercritical() ? TreeArena::Mode::harris
                                        : TreeArena::Mode::plain;
  return TreeArena(law, mode, seeds, std::move(marks));
}

}  // namespace

TreeWalkRecord simulate_tree_walk(TreeArena& tree, const BiasSpec& bias,
                                  const TreeWalkOptions& options,
                                  Stream& stream) {
  if (bias.is_random() && !tree.has_marks())
    throw std::invalid_argument(
        "simulate_tree_walk: random bias needs a marked tree");
  const bool random_bias = bias.is_random();
  const double beta = bias.beta();

  TreeWalkRecord rec;
  rec.delta.assign(static_cast<std::size_t>(options.record_levels), -1);

  std::int32_t pos = tree.root();
  std::int64_t step = 0;
  std::size_t next_sample = 0;

  auto arrived = [&](std::int32_t at) {
    pos = at;
    const std::int32_t d = tree.depth(pos);
    if (d > rec.max_depth) {
      rec.max_depth = d;
      if (d <= options.record_levels)
        rec.delta[static_cast<std::size_t>(d) - 1] = step;
    }
    if (pos == tree.root()) ++rec.root_visits;
    while (next_sample < options.sample_steps.size() &&
           options.sample_steps[next_sample] <= step) {
      rec.depth_at.push_back(d);
      ++next_sample;
    }
  };

  while (step < options.budget) {
    if (options.record_levels > 0 && rec.max_depth >= options.record_levels)
      break;
    auto [first, k] = tree.children(pos);
    if (tree.aborted()) {
      rec.aborted = true;
      break;
    }

    if (pos == tree.root()) {
      if (random_bias) {
        const double s = tree.mark_sum(pos);
        const double u = stream.u01() * (1.0 + s);
        if (u <= 1.0 || k == 0) {
          // artificial parent below the root; the return move is forced
          ++step;
          if (step >= options.budget) break;
          ++step;
          arrived(tree.root());
          continue;
        }
        ++step;
        arrived(pick_marked_child(tree, first, k, u - 1.0));
      } else {
        if (k == 0) break;  // childless root: the walk is stuck
        ++step;
        arrived(first + static_cast<std::int32_t>(
                            stream.below(static_cast<std::uint64_t>(k))));
      }
      continue;
    }

    std::int32_t next;
    if (random_bias) {
      const double s = tree.mark_sum(pos);
      const double u = stream.u01() * (1.0 + s);
      next = (u <= 1.0 || k == 0) ? tree.parent(pos)
                                  : pick_marked_child(tree, first, k, u - 1.0);
    } else {
      const double p_up = 1.0 / (1.0 + beta * static_cast<double>(k));
      next = (k == 0 || stream.u01() <= p_up)
                 ? tree.parent(pos)
                 : first + static_cast<std::int32_t>(
                               stream.below(static_cast<std::uint64_t>(k)));
    }
    ++step;
    arrived(next);
  }

  rec.steps = step;
  rec.final_depth = tree.depth(pos);
  if (options.record_levels > 0 && rec.max_depth < options.record_levels)
    rec.partial = true;
  return rec;
}

EstimateReport tree_walk_speed(const OffspringLaw& law, const BiasSpec& bias,
                               std::int64_t steps, std::size_t replicas,
                               SeedTree seeds, unsigned workers,
                               double burn_in) {
  const std::int64_t burn = static_cast<std::int64_t>(
      burn_in * static_cast<double>(steps));
  auto speeds = parallel_replicas<double>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        TreeArena tree = make_walk_arena(
            law, rep.child(0),
            bias.is_random() ? std::optional<BiasLaw>(bias.nu())
                             : std::nullopt);
        Stream walk = rep.child(1).stream();
        TreeWalkOptions opt;
        opt.budget = steps;
        opt.sample_steps = {burn, steps};
        const auto rec = simulate_tree_walk(tree, bias, opt, walk);
        const double d0 = static_cast<double>(rec.depth_at[0]);
        const double d1 = static_cast<double>(rec.depth_at[1]);
        return (d1 - d0) / static_cast<double>(steps - burn);
      },
      workers);

  EstimateReport rep;
  rep.method = "tree-speed";
  rep.replicas = replicas;
  double sum = 0.0, sum2 = 0.0;
  for (double v : speeds) {
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(replicas);
  rep.estimate = sum / n;
  const double var = std::max(0.0, sum2 / n - rep.estimate * rep.estimate);
  rep.std_error = std::sqrt(var / n);
  rep.ci_lo = rep.estimate - 1.96 * rep.std_error;
  rep.ci_hi = rep.estimate + 1.96 * rep.std_error;
  return rep;
}

TreeDeltaExponent tree_delta_exponent(const OffspringLaw& law,
                                      const BiasSpec& bias,
                                      const std::vector<std::int64_t>& levels,
                                      std::size_t replicas, std::int64_t budget,
                                      SeedTree seeds, unsigned workers) {
  if (levels.size() < 3)
    throw std::invalid_argument("tree_delta_exponent: need >= 3 levels");
  const std::int32_t max_level = static_cast<std::int32_t>(
      *std::max_element(levels.begin(), levels.end()));

  auto rows = parallel_replicas<std::vector<double>>(
      replicas,
      [&](std::size_t r) -> std::vector<double> {
        SeedTree rep = seeds.child(r);
        TreeArena tree = make_walk_arena(
            law, rep.child(0),
            bias.is_random() ? std::optional<BiasLaw>(bias.nu())
                             : std::nullopt);
        Stream walk = rep.child(1).stream();
        TreeWalkOptions opt;
        opt.budget = budget;
        opt.record_levels = max_level;
        const auto rec = simulate_tree_walk(tree, bias, opt, walk);
        if (rec.partial || rec.aborted) return {};
        std::vector<double> row(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i)
          row[i] = static_cast<double>(
              rec.delta[static_cast<std::size_t>(levels[i]) - 1]);
        return row;
      },
      workers);

  TreeDeltaExponent out;
  for (auto l : levels) out.levels.push_back(static_cast<double>(l));
  std::vector<std::vector<double>> complete;
  for (auto& row : rows) {
    if (row.empty())
      ++out.dropped_replicas;
    else
      complete.push_back(std::move(row));
  }
  if (complete.size() < 10)
    throw std::runtime_error("tree_delta_exponent: too many dropped replicas");
  out.median_delta.resize(levels.size());
  std::vector<double> col(complete.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t r = 0; r < complete.size(); ++r) col[r] = complete[r][i];
    out.median_delta[i] = median(col);
  }
  Stream boot = seeds.child(0x626f6f74).stream();
  out.slope = loglog_slope_of_medians(out.levels, complete, 1000, boot);
  return out;
}

namespace {

// One escape trial: does a fresh walk from the root of `tree` reach
// depth_cutoff before returning to the root?
bool escape_trial(TreeArena& tree, double beta, int depth_cutoff,
                  Stream& stream) {
  auto [first, k] = tree.children(tree.root());
  if (k == 0) return false;
  std::int32_t pos =
      first + static_cast<std::int32_t>(stream.below(static_cast<std::uint64_t>(k)));
  for (std::int64_t guard = 0; guard < 10'000'000; ++guard) {
    const std::int32_t d = tree.depth(pos);
    if (d >= depth_cutoff) return true;
    if (pos == tree.root()) return false;
    auto [cf, ck] = tree.children(pos);
    if (tree.aborted()) return false;
    const double p_up = 1.0 / (1.0 + beta * static_cast<double>(ck));
    pos = (ck == 0 || stream.u01() <= p_up)
              ? tree.parent(pos)
              : cf + static_cast<std::int32_t>(
                         stream.below(static_cast<std::uint64_t>(ck)));
  }
  return false;
}

}  // namespace

AidekonSpeed aidekon_speed(const OffspringLaw& law, double beta,
                           int depth_cutoff, std::size_t replicas,
                           std::size_t inner_trials, SeedTree seeds,
                           unsigned workers) {
  if (!(beta > 0.0)) throw std::invalid_argument("aidekon_speed: beta > 0");
  struct Summand {
    double num = 0.0, den = 0.0;
    bool skipped = false;
  };
  const double inv_beta = 1.0 / beta;

  auto summands = parallel_replicas<Summand>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        Stream zs = rep.child(0).stream();
        const int z = law.sample(zs);
        double eps0 = 0.0, eps_sum = 0.0;
        for (int i = 0; i <= z; ++i) {
          SeedTree es = rep.child(static_cast<std::uint64_t>(1 + i));
          TreeArena tree(law, TreeArena::Mode::plain, es.child(0));
          Stream w = es.child(1).stream();
          std::size_t succ = 0;
          for (std::size_t t = 0; t < inner_trials; ++t)
            succ += escape_trial(tree, beta, depth_cutoff, w) ? 1 : 0;
          const double eps =
              static_cast<double>(succ) / static_cast<double>(inner_trials);
          if (i == 0) eps0 = eps;
          eps_sum += eps;
        }
        Summand s;
        const double bracket = inv_beta - 1.0 + eps_sum;
        if (bracket <= 0.0) {
          if (eps0 > 0.0) s.skipped = true;  // pathological replica
          return s;
        }
        s.num = (static_cast<double>(z) - inv_beta) * eps0 / bracket;
        s.den = (static_cast<double>(z) + inv_beta) * eps0 / bracket;
        return s;
      },
      workers);

  AidekonSpeed out;
  out.undersampled = inner_trials < 100;
  double exact = 0.0;
  for (std::size_t k = 0; k <= law.max_k(); ++k)
    exact += law.p(k) * (static_cast<double>(k) - 1.0) /
             (static_cast<double>(k) + 1.0);
  out.exact_simple_walk = exact;

  std::vector<double> nums, dens;
  for (const auto& s : summands) {
    if (s.skipped) {
      ++out.skipped;
      continue;
    }
    nums.push_back(s.num);
    dens.push_back(s.den);
  }
  if (nums.empty()) throw std::runtime_error("aidekon_speed: no usable replicas");

  auto ratio_of = [&](const std::vector<std::uint32_t>* idx) {
    double n = 0.0, d = 0.0;
    if (idx) {
      for (auto i : *idx) {
        n += nums[i];
        d += dens[i];
      }
    } else {
      for (std::size_t i = 0; i < nums.size(); ++i) {
        n += nums[i];
        d += dens[i];
      }
    }
    return d != 0.0 ? n / d : 0.0;
  };

  out.estimate.method = "aidekon-formula-mc";
  out.estimate.replicas = nums.size();
  out.estimate.estimate = ratio_of(nullptr);
  Stream boot = seeds.child(0x626f6f74).stream();
  auto ci = bootstrap_percentile_ci(
      nums.size(),
      [&](const std::vector<std::uint32_t>& idx) { return ratio_of(&idx); },
      1000, boot);
  out.estimate.ci_lo = ci.first;
  out.estimate.ci_hi = ci.second;
  out.estimate.std_error = (ci.second - ci.first) / (2.0 * 1.96);
  return out;
}

LatticeDiagnostic lattice_diagnostic(const OffspringLaw& law, double beta,
                                     int k_max,
                                     const std::vector<double>& lambdas,
                                     std::size_t replicas, std::int64_t budget,
                                     SeedTree seeds, unsigned workers) {
  const auto bc = critical_bias(law);
  if (!bc || !(beta > *bc))
    throw std::invalid_argument("lattice_diagnostic: requires beta > beta_c");
  LatticeDiagnostic out;
  out.alpha = alpha_tree(law, beta);
  const double fq = 1.0 / *bc;

  for (double lambda : lambdas) {
    LatticeTrack track;
    track.lambda = lambda;
    for (int k = 0; k <= k_max; ++k) {
      const auto n = static_cast<std::int64_t>(
          std::floor(lambda * std::pow(fq, -static_cast<double>(k))));
      if (n >= 1) track.levels.push_back(n);
    }
    track.scaled.resize(track.levels.size());
    out.tracks.push_back(std::move(track));
  }

  std::int64_t max_level = 1;
  for (const auto& t : out.tracks)
    for (auto n : t.levels) max_level = std::max(max_level, n);

  struct Row {
    std::vector<std::int64_t> delta;
    bool censored;
  };
  auto rows = parallel_replicas<Row>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        TreeArena tree = make_walk_arena(law, rep.child(0));
        Stream walk = rep.child(1).stream();
        TreeWalkOptions opt;
        opt.budget = budget;
        opt.record_levels = static_cast<std::int32_t>(max_level);
        auto rec = simulate_tree_walk(tree, BiasSpec::fixed(beta), opt, walk);
        return Row{std::move(rec.delta), rec.partial || rec.aborted};
      },
      workers);

  for (const auto& row : rows)
    if (row.censored) ++out.censored;

  for (auto& track : out.tracks) {
    for (std::size_t i = 0; i < track.levels.size(); ++i) {
      const auto n = track.levels[i];
      const double scale =
          std::pow(static_cast<double>(n), 1.0 / out.alpha);
      for (const auto& row : rows) {
        const std::int64_t d = row.delta[static_cast<std::size_t>(n) - 1];
        if (d > 0) track.scaled[i].push_back(static_cast<double>(d) / scale);
      }
    }
    for (std::size_t i = 0; i + 1 < track.scaled.size(); ++i)
      track.cross_k_ks.push_back(
          ks_two_sample(track.scaled[i], track.scaled[i + 1]));
  }
  for (std::size_t a = 0; a < out.tracks.size(); ++a)
    for (std::size_t b = a + 1; b < out.tracks.size(); ++b)
      out.cross_lambda_ks.push_back(ks_two_sample(
          out.tracks[a].scaled.back(), out.tracks[b].scaled.back()));
  return out;
}

std::vector<double> random_bias_delta_samples(const OffspringLaw& law,
                                              const BiasLaw& nu,
                                              std::int64_t level,
                                              std::size_t replicas,
                                              std::int64_t budget,
                                              SeedTree seeds,
                                              unsigned workers) {
  return parallel_replicas<double>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        TreeArena tree = make_walk_arena(law, rep.child(0), nu);
        Stream walk = rep.child(1).stream();
        TreeWalkOptions opt;
        opt.budget = budget;
        opt.record_levels = static_cast<std::int32_t>(level);
        const auto rec =
            simulate_tree_walk(tree, BiasSpec::random(nu), opt, walk);
        if (rec.partial || rec.aborted)
          return std::numeric_limits<double>::infinity();
        return static_cast<double>(rec.delta[static_cast<std::size_t>(level) - 1]);
      },
      workers);
}

HeightTailEstimate gw_height_tail(const OffspringLaw& law, int n_max,
                                  std::size_t trees, SeedTree seeds,
                                  unsigned workers) {
  constexpr std::size_t kBatches = 1024;
  constexpr std::size_t kProgenyCap = 10'000'000;
  const std::size_t per_batch = (trees + kBatches - 1) / kBatches;

  auto batches = parallel_replicas<std::vector<std::int64_t>>(
      kBatches,
      [&](std::size_t b) {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(n_max) + 1, 0);
        Stream s = seeds.child(b).stream();
        std::vector<std::int64_t> none;
        for (std::size_t t = 0; t < per_batch; ++t) {
          // population process capped at generation n_max
          std::int64_t pop = 1;
          std::size_t progeny = 1;
          int reached = 0;
          for (int g = 0; g < n_max && pop > 0; ++g) {
            std::int64_t next = 0;
            for (std::int64_t i = 0; i < pop; ++i) next += law.sample(s);
            pop = next;
            progeny += static_cast<std::size_t>(next);
            if (pop > 0) reached = g + 1;
            if (progeny > kProgenyCap) {
              reached = n_max;  // flagged survivor; cap keeps work bounded
              break;
            }
          }
          for (int n = 0; n <= reached; ++n) ++counts[static_cast<std::size_t>(n)];
        }
        return counts;
      },
      workers);

  HeightTailEstimate out;
  out.trees = per_batch * kBatches;
  out.survival.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (const auto& counts : batches)
    for (std::size_t n = 0; n < counts.size(); ++n)
      out.survival[n] += static_cast<double>(counts[n]);
  for (auto& v : out.survival) v /= static_cast<double>(out.trees);
  return out;
}

std::vector<double> gw_height_survival_exact(const OffspringLaw& law,
                                             int n_max) {
  std::vector<double> u(static_cast<std::size_t>(n_max) + 1);
  u[0] = 1.0;
  for (int n = 0; n < n_max; ++n)
    u[static_cast<std::size_t>(n) + 1] =
        1.0 - law.f(1.0 - u[static_cast<std::size_t>(n)]);
  return u;
}

}  // namespace rwlab
