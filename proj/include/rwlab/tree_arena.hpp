#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwlab/offspring.hpp"
#include "rwlab/seed_tree.hpp"

namespace rwlab {

// Lazily grown rooted tree. Nodes materialize their children on first
// access, in visit order, drawing from the arena's own stream; the arena is
// confined to one replica worker. Growth modes:
//   plain             i.i.d. offspring from the law (unconditioned tree)
//   harris            backbone from the g-law with h-law traps attached,
//                     bud counts from the conditional law given the degree
//                     (the tree conditioned on non-extinction)
//   subcritical_trap  a single finite h-tree of the law's Harris split
//   binary_with_pipes deterministic: every backbone vertex carries two
//                     backbone children and one infinite unary pipe
class TreeArena {
 public:
  enum class Mode { plain, harris, subcritical_trap, binary_with_pipes };

  static constexpr std::size_t kDefaultNodeCap = 10'000'000;

  TreeArena(OffspringLaw law, Mode mode, SeedTree seeds,
            std::optional<BiasLaw> edge_marks = std::nullopt,
            std::size_t node_cap = kDefaultNodeCap);

  std::int32_t root() const { return 0; }
  std::int32_t parent(std::int32_t v) const { return parent_[v]; }
  std::int32_t depth(std::int32_t v) const { return depth_[v]; }
  bool backbone(std::int32_t v) const { return backbone_[v] != 0; }

  // Materializes and returns (first_child, count). Children occupy
  // consecutive ids. After an abort (node cap) the count reads as 0.
  std::pair<std::int32_t, std::int32_t> children(std::int32_t v);

  bool materialized(std::int32_t v) const { return n_children_[v] >= 0; }
  double edge_mark(std::int32_t child) const { return marks_[child]; }
  double mark_sum(std::int32_t v) const { return mark_sum_[v]; }
  bool has_marks() const { return bias_law_.has_value(); }

  std::size_t node_count() const { return parent_.size(); }
  bool aborted() const { return aborted_; }
  Mode mode() const { return mode_; }
  const OffspringLaw& law() const { return law_; }
  const GWAnalytics* analytics() const {
    return analytics_ ? &*analytics_ : nullptr;
  }

 private:
  std::int32_t add_node(std::int32_t parent, bool backbone);
  int sample_bud_count(int deg);

  OffspringLaw law_;
  Mode mode_;
  std::optional<GWAnalytics> analytics_;
  std::optional<BiasLaw> bias_law_;
  Stream stream_;
  std::size_t node_cap_;
  bool aborted_ = false;

  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> depth_;
  std::vector<std::int32_t> first_child_;
  std::vector<std::int32_t> n_children_;  // -1 = not yet materialized
  std::vector<std::uint8_t> backbone_;
  std::vector<double> marks_;     // A coefficient on (parent(v), v)
  std::vector<double> mark_sum_;  // sum of child marks once materialized
};

}  // namespace rwlab
