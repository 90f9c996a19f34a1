#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "rwlab/iic.hpp"
#include "rwlab/parallel.hpp"
#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"
#include "rwlab/tree_walk.hpp"

using namespace rwlab;

namespace {

CriticalLaw binary_law() { return CriticalLaw(OffspringLaw({0.5, 0.0, 0.5})); }
// p0 = 1/2, p1 = 1/4, p3 = 1/4: mean 1, Var = E[Z^2] - 1 = 1.5
CriticalLaw three_atom_law() {
  return CriticalLaw(OffspringLaw({0.5, 0.25, 0.0, 0.25}));
}

}  // namespace

TEST_CASE("critical law validation and size-biased companion") {
  CHECK_THROWS(CriticalLaw(OffspringLaw({0.0, 1.0})));        // Var = 0
  CHECK_THROWS(CriticalLaw(OffspringLaw({0.1, 0.0, 0.9})));   // mean != 1
  const auto law = binary_law();
  CHECK(law.variance() == doctest::Approx(1.0));
  CHECK(law.size_biased().p(2) == doctest::Approx(1.0));  // k p_k on {2}
  const auto law3 = three_atom_law();
  CHECK(law3.size_biased().p(1) == doctest::Approx(0.25));
  CHECK(law3.size_biased().p(3) == doctest::Approx(0.75));
  CHECK(law3.variance() == doctest::Approx(1.5));
}

TEST_CASE("spine structure: one spine child per spine vertex, pi projection") {
  SpineIIC tree(binary_law(), SeedTree(201));
  std::int32_t spine = tree.root();
  for (int i = 0; i < 300; ++i) {
    CHECK(tree.on_spine(spine));
    CHECK(tree.pi(spine) == i);       // pi(spine vertex) = itself
    CHECK(tree.depth(spine) == i);    // the spine is a ray
    auto [first, k] = tree.children(spine);
    REQUIRE(k == 2);  // size-biased law of the binary case is Z-tilde == 2
    std::int32_t next = -1;
    for (std::int32_t c = first; c < first + k; ++c) {
      if (tree.on_spine(c))
        next = c;
      else
        CHECK(tree.pi(c) == i);  // buds project to their spine vertex
    }
    REQUIRE(next >= 0);
    spine = next;
  }
}

TEST_CASE("pi is idempotent across bud subtrees") {
  SpineIIC tree(three_atom_law(), SeedTree(202));
  // explore a few levels of everything
  std::vector<std::int32_t> frontier{tree.root()};
  for (int g = 0; g < 8; ++g) {
    std::vector<std::int32_t> next;
    for (auto v : frontier) {
      auto [first, k] = tree.children(v);
      for (std::int32_t c = first; c < first + k; ++c) {
        // pi lands on the spine, where pi is the identity
        const auto p = tree.pi(c);
        CHECK(p >= 0);
        if (!tree.on_spine(c)) CHECK(p == tree.pi(tree.parent(c)));
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
}

TEST_CASE("spine offspring frequencies follow the size-biased law") {
  const auto law = three_atom_law();
  std::map<int, std::int64_t> counts;
  std::size_t total = 0;
  for (std::size_t r = 0; r < 200; ++r) {
    SpineIIC tree(law, SeedTree(203).child(r));
    std::int32_t spine = tree.root();
    for (int i = 0; i < 500; ++i) {
      auto [first, k] = tree.children(spine);
      ++counts[k];
      ++total;
      std::int32_t next = -1;
      for (std::int32_t c = first; c < first + k; ++c)
        if (tree.on_spine(c)) next = c;
      spine = next;
    }
  }
  std::vector<std::int64_t> observed;
  std::vector<double> expected;
  for (int k = 1; k <= 3; ++k) {
    observed.push_back(counts[k]);
    expected.push_back(law.size_biased().p(static_cast<std::size_t>(k)));
  }
  CHECK(chi_square_pvalue(observed, expected) >= 0.001);
  // empirical mean of spine offspring ~ E[Z^2] (= 2.5 here) within 4 stderr
  double mean = 0.0;
  for (auto& [k, c] : counts) mean += static_cast<double>(k * c);
  mean /= static_cast<double>(total);
  const double sb_var = 0.25 * 1 + 0.75 * 9 - 2.5 * 2.5;
  CHECK(std::abs(mean - 2.5) <=
        4.0 * std::sqrt(sb_var / static_cast<double>(total)));
}

TEST_CASE("bud trees are finite: survivors of a progeny cap match the tail") {
  // Kolmogorov: P[total progeny >= s] ~ sqrt(2/(pi sigma^2 s)); at the cap
  // s = 1e6 that is 8.0e-4, so survivors are rare but strictly expected
  const auto law = binary_law();
  const std::size_t trees = 100000;
  const std::size_t cap = 1000000;
  auto survivors = parallel_replicas<char>(
      trees,
      [&](std::size_t r) -> char {
        Stream s = SeedTree(204).child(r).stream();
        std::int64_t pop = 1;
        std::size_t progeny = 1;
        while (pop > 0) {
          std::int64_t next = 0;
          for (std::int64_t i = 0; i < pop; ++i)
            next += law.law().sample(s);
          pop = next;
          progeny += static_cast<std::size_t>(next);
          if (progeny > cap) return 1;
        }
        return 0;
      });
  std::size_t n_surv = 0;
  for (char c : survivors) n_surv += static_cast<std::size_t>(c);
  const double expected =
      std::sqrt(2.0 / (3.14159265358979 * static_cast<double>(cap)));
  const double frac = static_cast<double>(n_surv) / static_cast<double>(trees);
  CHECK(frac < 3.0 * expected);   // almost-sure finiteness at desk scale
  CHECK(frac > expected / 3.0);   // and the survival rate is the real tail
}

TEST_CASE("critical height tail matches the exact recursion") {
  const auto law = binary_law();
  const std::vector<int> grid{5, 10, 20, 40};
  const auto tail = critical_height_tail(law, grid, 2000000, SeedTree(205));
  const auto exact = gw_height_survival_exact(law.law(), 40);
  CHECK(tail.asymptote_constant == doctest::Approx(2.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = exact[static_cast<std::size_t>(grid[i])];
    const double se =
        std::sqrt(p * (1.0 - p) / static_cast<double>(tail.trees));
    CHECK(std::abs(tail.survival[i] - p) <= 5.0 * se);
    CHECK(tail.n_times_survival[i] ==
          doctest::Approx(grid[i] * tail.survival[i]));
  }
  CHECK(tail.survival[0] <= 1.0);
}

TEST_CASE("single-excursion durations: batched sampler vs naive stepping") {
  // the batched draw is claimed exact in distribution; compare bucketed
  // frequencies over independent environments
  const auto law = binary_law();
  const double beta = 2.0;
  const std::size_t n = 30000;
  constexpr std::int64_t kCensor = 200000;

  auto naive_excursion = [&](SeedTree seeds) {
    // lazily grown critical bud; walk enters from an external parent
    std::vector<int> kids{-1};
    std::vector<int> first{-1};
    std::vector<int> parent{-2};
    Stream grow = seeds.child(0).stream();
    Stream walk = seeds.child(1).stream();
    auto ensure = [&](int v) {
      if (kids[static_cast<std::size_t>(v)] >= 0) return;
      const int k = law.law().sample(grow);
      first[static_cast<std::size_t>(v)] = static_cast<int>(kids.size());
      kids[static_cast<std::size_t>(v)] = k;
      for (int j = 0; j < k; ++j) {
        kids.push_back(-1);
        first.push_back(-1);
        parent.push_back(v);
      }
    };
    std::int64_t t = 1;  // the entry step
    int pos = 0;
    // excursion durations have a 1/ln(t) tail, so stepping must censor:
    // both samples are compared through the same censoring cap
    for (; t < kCensor;) {
      ensure(pos);
      const int k = kids[static_cast<std::size_t>(pos)];
      const double p_up = 1.0 / (1.0 + beta * k);
      int next;
      if (k == 0 || walk.u01() <= p_up)
        next = parent[static_cast<std::size_t>(pos)];
      else
        next = first[static_cast<std::size_t>(pos)] +
               static_cast<int>(walk.below(static_cast<std::uint64_t>(k)));
      ++t;
      if (next == -2) return t;
      pos = next;
    }
    return kCensor;
  };

  std::vector<double> batched(n), stepped(n);
  for (std::size_t r = 0; r < n; ++r) {
    batched[r] = std::min<double>(
        iic_trap_excursion(law, beta, SeedTree(206).child(r)).duration,
        static_cast<double>(kCensor));
    stepped[r] = static_cast<double>(naive_excursion(SeedTree(207).child(r)));
  }
  // bucket frequencies: {2, 4, 6-20, 22-200, 200-cap, censored}
  auto bucketize = [&](const std::vector<double>& xs) {
    std::vector<std::int64_t> b(6, 0);
    for (double x : xs) {
      if (x <= 2.0)
        ++b[0];
      else if (x <= 4.0)
        ++b[1];
      else if (x <= 20.0)
        ++b[2];
      else if (x <= 200.0)
        ++b[3];
      else if (x < static_cast<double>(kCensor))
        ++b[4];
      else
        ++b[5];
    }
    return b;
  };
  const auto ba = bucketize(batched), bb = bucketize(stepped);
  for (std::size_t i = 0; i < 6; ++i) {
    const double pa = static_cast<double>(ba[i]) / static_cast<double>(n);
    const double pb = static_cast<double>(bb[i]) / static_cast<double>(n);
    const double se = std::sqrt((pa * (1 - pa) + pb * (1 - pb)) /
                                static_cast<double>(n));
    CHECK(std::abs(pa - pb) <= 4.0 * se + 1e-9);
  }
}

TEST_CASE("trap waiting tails are slowly varying: P[T >= t] ln t band") {
  const auto law = binary_law();
  const std::size_t n = 30000;
  std::vector<double> durations(n);
  for (std::size_t r = 0; r < n; ++r)
    durations[r] = iic_trap_excursion(law, 2.0, SeedTree(208).child(r)).duration;
  for (double t : {1e3, 1e4, 1e5, 1e6}) {
    std::size_t count = 0;
    for (double d : durations) count += d >= t ? 1 : 0;
    const double p = static_cast<double>(count) / static_cast<double>(n);
    const double v = p * std::log(t);
    CHECK(v > 0.5);
    CHECK(v < 2.0);
  }
}

TEST_CASE("extremal aging: trivial equal times and the a/b limit") {
  const auto law = binary_law();
  const auto same = biased_walk_iic(law, 2.0, 1.0, 1.0, 10, {0.5, 1.0}, 200,
                                    SeedTree(209));
  CHECK(same.aging_p_hat == 1.0);

  const auto est = biased_walk_iic(law, 2.0, 1.0, 2.0, 18, {0.5, 1.0, 1.5, 2.0},
                                   1200, SeedTree(210));
  CHECK(est.a_over_b == doctest::Approx(0.5));
  CHECK(std::abs(est.aging_p_hat - 0.5) < 0.06);
  // profiles are nondecreasing in t for every replica
  for (const auto& prof : est.profiles)
    for (std::size_t i = 0; i + 1 < prof.size(); ++i)
      CHECK(prof[i] <= prof[i + 1] + 1e-12);
}

TEST_CASE("aging probability is nonincreasing in b for fixed a") {
  const auto law = binary_law();
  double prev = 1.1;
  for (double b : {1.5, 2.5, 4.0}) {
    const auto est = biased_walk_iic(law, 2.0, 1.0, b, 14, {1.0}, 1200,
                                     SeedTree(211).child(static_cast<std::uint64_t>(b * 2)));
    CHECK(est.aging_p_hat < prev);
    prev = est.aging_p_hat;
  }
}

TEST_CASE("simple walk displacement exponent near 1/3") {
  const auto law = binary_law();
  const std::vector<std::int64_t> grid{10000, 40000, 160000, 640000};
  const auto disp = simple_walk_iic(law, grid, 150, SeedTree(212));
  CHECK(disp.slope.estimate > 0.26);
  CHECK(disp.slope.estimate < 0.40);
  for (double m : disp.median_disp) CHECK(m >= 0.0);
}

TEST_CASE("biased walk displacement is logarithmic (negative control)") {
  const auto law = binary_law();
  const std::vector<std::int64_t> grid{10000, 40000, 160000, 640000};
  const auto disp = biased_walk_iic_displacement(law, 2.0, grid, 60,
                                                 SeedTree(213));
  CHECK(disp.slope.estimate < 0.15);
}
