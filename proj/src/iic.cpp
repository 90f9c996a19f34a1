#include "rwlab/iic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwlab/discrete_sampling.hpp"
#include "rwlab/parallel.hpp"
#include "rwlab/tree_walk.hpp"

namespace rwlab {

CriticalLaw::CriticalLaw(OffspringLaw law)
    : law_(std::move(law)),
      size_biased_(OffspringLaw({1.0})),
      variance_(0.0) {
  if (std::abs(law_.mean() - 1.0) > 1e-12)
    throw std::invalid_argument("CriticalLaw: mean must equal 1");
  variance_ = law_.variance();
  if (!(variance_ > 0.0))
    throw std::invalid_argument("CriticalLaw: degenerate law (Var = 0)");
  // size-biased pmf k p_k (the mean-1 normalization is exact)
  std::vector<double> sb(law_.max_k() + 1, 0.0);
  for (std::size_t k = 1; k <= law_.max_k(); ++k)
    sb[k] = static_cast<double>(k) * law_.p(k);
  size_biased_ = OffspringLaw(std::move(sb));
}

SpineIIC::SpineIIC(CriticalLaw law, SeedTree seeds, std::size_t node_cap)
    : law_(std::move(law)), stream_(seeds.stream()), node_cap_(node_cap) {
  add_node(-1, 0);
}

std::int32_t SpineIIC::add_node(std::int32_t parent, std::int32_t spine_pos) {
  const auto id = static_cast<std::int32_t>(parent_.size());
  parent_.push_back(parent);
  depth_.push_back(parent < 0 ? 0 : depth_[parent] + 1);
  pi_.push_back(spine_pos >= 0 ? spine_pos : (parent < 0 ? 0 : pi_[parent]));
  first_child_.push_back(-1);
  n_children_.push_back(-1);
  spine_pos_.push_back(spine_pos);
  return id;
}

std::pair<std::int32_t, std::int32_t> SpineIIC::children(std::int32_t v) {
  if (n_children_[v] >= 0) return {first_child_[v], n_children_[v]};
  if (aborted_) return {-1, 0};
  int k;
  std::int32_t spine_child = -1;
  if (spine_pos_[v] >= 0) {
    k = law_.size_biased().sample(stream_);
    spine_child = static_cast<std::int32_t>(
        stream_.below(static_cast<std::uint64_t>(k)));
  } else {
    k = law_.law().sample(stream_);
  }
  if (parent_.size() + static_cast<std::size_t>(k) > node_cap_) {
    aborted_ = true;
    n_children_[v] = 0;
    return {-1, 0};
  }
  const auto first = static_cast<std::int32_t>(parent_.size());
  for (int j = 0; j < k; ++j)
    add_node(v, j == spine_child ? spine_pos_[v] + 1 : -1);
  first_child_[v] = k > 0 ? first : -1;
  n_children_[v] = k;
  return {first_child_[v], n_children_[v]};
}

CriticalHeightTail critical_height_tail(const CriticalLaw& law,
                                        const std::vector<int>& n_grid,
                                        std::size_t trees, SeedTree seeds,
                                        unsigned workers) {
  int n_max = 1;
  for (int n : n_grid) n_max = std::max(n_max, n);
  const auto tail = gw_height_tail(law.law(), n_max, trees, seeds, workers);

  CriticalHeightTail out;
  out.n_grid = n_grid;
  out.trees = tail.trees;
  out.asymptote_constant = 2.0 / law.variance();
  for (int n : n_grid) {
    const double p = tail.survival[static_cast<std::size_t>(n)];
    out.survival.push_back(p);
    out.n_times_survival.push_back(static_cast<double>(n) * p);
  }
  return out;
}

namespace {

// A lazily materialized critical bud tree used by the batched walk engine.
struct Bud {
  Stream stream;
  std::vector<std::int32_t> n_children{-1};
  std::vector<std::int32_t> first_child{-1};
  explicit Bud(Stream s) : stream(s) {}
};

struct BudBudget {
  std::size_t nodes = 0;
  std::size_t cap = 50'000'000;
  bool exhausted = false;
};

std::int32_t bud_child_count(const OffspringLaw& law, Bud& bud,
                             std::int32_t v, BudBudget& budget) {
  if (bud.n_children[static_cast<std::size_t>(v)] >= 0)
    return bud.n_children[static_cast<std::size_t>(v)];
  const int k = law.sample(bud.stream);
  if (budget.nodes + static_cast<std::size_t>(k) > budget.cap) {
    budget.exhausted = true;
    bud.n_children[static_cast<std::size_t>(v)] = 0;
    return 0;
  }
  budget.nodes += static_cast<std::size_t>(k);
  bud.first_child[static_cast<std::size_t>(v)] =
      static_cast<std::int32_t>(bud.n_children.size());
  bud.n_children[static_cast<std::size_t>(v)] = k;
  for (int j = 0; j < k; ++j) {
    bud.n_children.push_back(-1);
    bud.first_child.push_back(-1);
  }
  return k;
}

// Total duration of m i.i.d. excursions of the beta-biased walk into the
// bud. Exact in distribution: across e entries into a vertex with k
// children and up-probability p = 1/(1 + beta k), the total number of
// child descents before the e-th exit is NegBinomial(e, p), split uniformly
// over the children; every step is an entry/exit edge crossing, so the
// duration is twice the total entry count (strong Markov property).
double batched_bud_sojourn(const OffspringLaw& law, double beta, Bud& bud,
                           double m, Stream& walk, BudBudget& budget) {
  double total_entries = 0.0;
  std::vector<std::pair<std::int32_t, double>> stack{{0, m}};
  while (!stack.empty()) {
    const auto [v, entries] = stack.back();
    stack.pop_back();
    total_entries += entries;
    const std::int32_t k = bud_child_count(law, bud, v, budget);
    if (k == 0 || budget.exhausted) continue;
    const double p_up = 1.0 / (1.0 + beta * static_cast<double>(k));
    double descents = sample_negative_binomial(entries, p_up, walk);
    if (descents <= 0.0) continue;
    const auto first = bud.first_child[static_cast<std::size_t>(v)];
    for (std::int32_t j = 0; j < k; ++j) {
      const double share =
          j == k - 1 ? descents
                     : sample_binomial(descents,
                                       1.0 / static_cast<double>(k - j), walk);
      descents -= share;
      if (share > 0.0) stack.emplace_back(first + j, share);
    }
  }
  return 2.0 * total_entries;
}

// Episode-batched biased walk along the IIC spine. Bud excursions are
// collapsed into exact total-duration draws; the walk's spine moves and the
// segment timeline [arrival, departure) per spine vertex are kept, which is
// all the extremal observables need (pi is constant over a segment).
class IicBiasedWalker {
 public:
  IicBiasedWalker(const CriticalLaw& law, double beta, SeedTree env,
                  Stream walk)
      : law_(law), beta_(beta), env_(env), walk_(walk) {
    if (!(beta > 1.0))
      throw std::invalid_argument("IicBiasedWalker: beta must be > 1");
  }

  struct RunResult {
    std::vector<std::int32_t> pi_at;  // aligned with obs_times
    std::vector<double> delta;        // delta[k]: clock at first visit of spine k
    bool aborted = false;
  };

  RunResult run(const std::vector<double>& obs_times, double t_stop,
                int level_stop) {
    RunResult res;
    res.delta.assign(static_cast<std::size_t>(level_stop) + 1, -1.0);
    res.delta[0] = 0.0;

    int i = 0;
    int max_level = 0;
    double clock = 0.0;
    std::size_t next_obs = 0;

    for (std::int64_t guard = 0; guard < 2'000'000'000; ++guard) {
      if (next_obs >= obs_times.size() && clock >= t_stop &&
          max_level >= level_stop)
        break;
      Site& s = site(i);
      if (budget_.exhausted) {
        res.aborted = true;
        break;
      }
      const int k = s.k;
      const int n_buds = k - 1;
      const double p_parent =
          i > 0 ? 1.0 / (1.0 + beta_ * static_cast<double>(k)) : 0.0;
      const double p_child =
          i > 0 ? beta_ / (1.0 + beta_ * static_cast<double>(k))
                : 1.0 / static_cast<double>(k);
      const double p_spine = p_parent + p_child;

      double stay = 1.0;  // the departure step
      if (n_buds > 0) {
        double entries = sample_geometric_count(p_spine, walk_);
        for (int b = 0; b < n_buds && entries > 0.0; ++b) {
          const double share =
              b == n_buds - 1
                  ? entries
                  : sample_binomial(entries,
                                    1.0 / static_cast<double>(n_buds - b),
                                    walk_);
          entries -= share;
          if (share > 0.0)
            stay += batched_bud_sojourn(law_.law(), beta_, s.buds[
                        static_cast<std::size_t>(b)], share, walk_, budget_);
        }
        if (budget_.exhausted) {
          res.aborted = true;
          break;
        }
      }

      while (next_obs < obs_times.size() && obs_times[next_obs] < clock + stay) {
        res.pi_at.push_back(i);
        ++next_obs;
      }
      clock += stay;

      const bool up = p_parent > 0.0 && walk_.u01() <= p_parent / p_spine;
      i += up ? -1 : 1;
      if (i > max_level) {
        max_level = i;
        if (i <= level_stop) res.delta[static_cast<std::size_t>(i)] = clock;
      }
    }
    return res;
  }

 private:
  struct Site {
    int k = 0;
    std::vector<Bud> buds;
  };

  Site& site(int i) {
    while (static_cast<std::size_t>(i) >= sites_.size()) {
      const auto idx = static_cast<std::uint64_t>(sites_.size());
      SeedTree site_seed = env_.child(idx);
      Stream zs = site_seed.child(0).stream();
      Site s;
      s.k = law_.size_biased().sample(zs);
      for (int b = 0; b + 1 < s.k; ++b)
        s.buds.emplace_back(site_seed.child(static_cast<std::uint64_t>(1 + b)).stream());
      sites_.push_back(std::move(s));
    }
    return sites_[static_cast<std::size_t>(i)];
  }

  const CriticalLaw& law_;
  double beta_;
  SeedTree env_;
  Stream walk_;
  std::vector<Site> sites_;
  BudBudget budget_;
};

}  // namespace

IicBiasedResult biased_walk_iic(const CriticalLaw& law, double beta, double a,
                                double b, int n,
                                const std::vector<double>& t_grid,
                                std::size_t replicas, SeedTree seeds,
                                unsigned workers) {
  if (!(a > 0.0) || a > b)
    throw std::invalid_argument("biased_walk_iic: need 0 < a <= b");
  const double ta = std::exp(a * static_cast<double>(n));
  const double tb = std::exp(b * static_cast<double>(n));
  double t_max = 0.0;
  for (double t : t_grid) t_max = std::max(t_max, t);
  const int level_stop =
      std::max(1, static_cast<int>(std::ceil(static_cast<double>(n) * t_max)));

  struct Row {
    char same = 0;
    char ok = 0;
    std::vector<double> profile;
  };
  auto rows = parallel_replicas<Row>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        IicBiasedWalker walker(law, beta, rep.child(0),
                               rep.child(1).stream());
        const auto res = walker.run({ta, tb}, tb, level_stop);
        Row row;
        if (res.aborted) return row;
        row.ok = 1;
        row.same = res.pi_at[0] == res.pi_at[1] ? 1 : 0;
        row.profile.reserve(t_grid.size());
        for (double t : t_grid) {
          const auto lvl = static_cast<std::size_t>(
              std::max(1.0, std::floor(static_cast<double>(n) * t)));
          row.profile.push_back(
              std::max(0.0, std::log(res.delta[lvl])) /
              (static_cast<double>(n) * std::log(beta)));
        }
        return row;
      },
      workers);

  IicBiasedResult out;
  out.a_over_b = a / b;
  out.t_grid = t_grid;
  std::size_t used = 0, same = 0;
  for (auto& row : rows) {
    if (!row.ok) continue;
    ++used;
    same += static_cast<std::size_t>(row.same);
    out.profiles.push_back(std::move(row.profile));
  }
  if (used == 0) throw std::runtime_error("biased_walk_iic: all replicas aborted");
  out.replicas = used;
  out.aging_p_hat = static_cast<double>(same) / static_cast<double>(used);
  out.aging_std_error = std::sqrt(out.aging_p_hat * (1.0 - out.aging_p_hat) /
                                  static_cast<double>(used));
  return out;
}

std::vector<std::int32_t> iic_biased_pi_batched(const CriticalLaw& law,
                                                double beta,
                                                const std::vector<double>& times,
                                                SeedTree seeds) {
  IicBiasedWalker walker(law, beta, seeds.child(0), seeds.child(1).stream());
  return walker.run(times, 0.0, 0).pi_at;
}

std::vector<std::int32_t> iic_biased_pi_stepped(const CriticalLaw& law,
                                                double beta,
                                                const std::vector<double>& times,
                                                SeedTree seeds) {
  SpineIIC tree(law, seeds.child(0));
  Stream walk = seeds.child(1).stream();
  std::vector<std::int32_t> out;
  std::int32_t pos = tree.root();
  double step = 0.0;
  std::size_t next = 0;
  while (next < times.size() && times[next] <= 0.0) {
    out.push_back(tree.pi(pos));
    ++next;
  }
  while (next < times.size()) {
    auto [first, k] = tree.children(pos);
    if (tree.aborted())
      throw std::runtime_error("iic_biased_pi_stepped: node cap exceeded");
    std::int32_t nxt;
    if (pos == tree.root()) {
      nxt = first + static_cast<std::int32_t>(
                        walk.below(static_cast<std::uint64_t>(k)));
    } else {
      const double p_up = 1.0 / (1.0 + beta * static_cast<double>(k));
      nxt = (k == 0 || walk.u01() <= p_up)
                ? tree.parent(pos)
                : first + static_cast<std::int32_t>(
                              walk.below(static_cast<std::uint64_t>(k)));
    }
    pos = nxt;
    step += 1.0;
    while (next < times.size() && times[next] <= step) {
      out.push_back(tree.pi(pos));
      ++next;
    }
  }
  return out;
}

TrapExcursion iic_trap_excursion(const CriticalLaw& law, double beta,
                                 SeedTree seeds) {
  Bud bud(seeds.child(0).stream());
  Stream walk = seeds.child(1).stream();
  BudBudget budget;
  const double d = batched_bud_sojourn(law.law(), beta, bud, 1.0, walk, budget);
  // height of the materialized (visited) part of the bud
  int height = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [v, h] = stack.back();
    stack.pop_back();
    height = std::max(height, h);
    const auto k = bud.n_children[static_cast<std::size_t>(v)];
    if (k <= 0) continue;
    const auto first = bud.first_child[static_cast<std::size_t>(v)];
    for (std::int32_t j = 0; j < k; ++j) stack.emplace_back(first + j, h + 1);
  }
  return {d, height};
}

namespace {

IicDisplacement stepped_displacement(const CriticalLaw& law, double beta,
                                     const std::vector<std::int64_t>& n_grid,
                                     std::size_t replicas, SeedTree seeds,
                                     unsigned workers) {
  const std::int64_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
  auto rows = parallel_replicas<std::vector<double>>(
      replicas,
      [&](std::size_t r) {
        SeedTree rep = seeds.child(r);
        SpineIIC tree(law, rep.child(0));
        Stream walk = rep.child(1).stream();
        std::vector<double> row;
        row.reserve(n_grid.size());
        std::int32_t pos = tree.root();
        std::size_t next = 0;
        for (std::int64_t step = 1; step <= n_max; ++step) {
          auto [first, k] = tree.children(pos);
          if (tree.aborted())
            throw std::runtime_error("iic walk: node cap exceeded");
          if (pos == tree.root()) {
            pos = first + static_cast<std::int32_t>(
                              walk.below(static_cast<std::uint64_t>(k)));
          } else {
            const double p_up = 1.0 / (1.0 + beta * static_cast<double>(k));
            pos = (k == 0 || walk.u01() <= p_up)
                      ? tree.parent(pos)
                      : first + static_cast<std::int32_t>(
                                    walk.below(static_cast<std::uint64_t>(k)));
          }
          while (next < n_grid.size() && n_grid[next] == step) {
            row.push_back(static_cast<double>(tree.depth(pos)));
            ++next;
          }
        }
        return row;
      },
      workers);

  IicDisplacement out;
  for (auto n : n_grid) out.n_grid.push_back(static_cast<double>(n));
  out.median_disp.resize(n_grid.size());
  std::vector<double> col(replicas);
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    for (std::size_t r = 0; r < replicas; ++r) col[r] = rows[r][i];
    out.median_disp[i] = median(col);
  }
  Stream boot = seeds.child(0x626f6f74).stream();
  out.slope = loglog_slope_of_medians(out.n_grid, rows, 1000, boot);
  return out;
}

}  // namespace

IicDisplacement simple_walk_iic(const CriticalLaw& law,
                                const std::vector<std::int64_t>& n_grid,
                                std::size_t replicas, SeedTree seeds,
                                unsigned workers) {
  return stepped_displacement(law, 1.0, n_grid, replicas, seeds, workers);
}

IicDisplacement biased_walk_iic_displacement(
    const CriticalLaw& law, double beta,
    const std::vector<std::int64_t>& n_grid, std::size_t replicas,
    SeedTree seeds, unsigned workers) {
  return stepped_displacement(law, beta, n_grid, replicas, seeds, workers);
}

}  // namespace rwlab
