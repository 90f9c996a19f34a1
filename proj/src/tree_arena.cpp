#include "rwlab/tree_arena.hpp"

#include <stdexcept>

namespace rwlab {

TreeArena::TreeArena(OffspringLaw law, Mode mode, SeedTree seeds,
                     std::optional<BiasLaw> edge_marks, std::size_t node_cap)
    : law_(std::move(law)),
      mode_(mode),
      bias_law_(std::move(edge_marks)),
      stream_(seeds.stream()),
      node_cap_(node_cap) {
  if (mode_ == Mode::harris || mode_ == Mode::subcritical_trap) {
    if (!law_.supercritical())
      throw std::invalid_argument("TreeArena: mode needs a supercritical law");
    analytics_ = GWAnalytics::analyze(law_);
    if (mode_ == Mode::subcritical_trap && !analytics_->h)
      throw std::invalid_argument(
          "TreeArena: leafless law has no trap component");
  }
  // root; on the backbone in every mode that has one
  const bool root_backbone =
      mode_ == Mode::harris || mode_ == Mode::binary_with_pipes;
  add_node(-1, root_backbone);
}

std::int32_t TreeArena::add_node(std::int32_t parent, bool backbone) {
  const auto id = static_cast<std::int32_t>(parent_.size());
  parent_.push_back(parent);
  depth_.push_back(parent < 0 ? 0 : depth_[parent] + 1);
  first_child_.push_back(-1);
  n_children_.push_back(-1);
  backbone_.push_back(backbone ? 1 : 0);
  double mark = 1.0;
  if (bias_law_ && parent >= 0) mark = bias_law_->sample(stream_);
  marks_.push_back(mark);
  mark_sum_.push_back(0.0);
  return id;
}

int TreeArena::sample_bud_count(int deg) {
  const auto& cdf = analytics_->bud_cdf_by_deg[static_cast<std::size_t>(deg - 1)];
  const double u = stream_.u01();
  for (std::size_t j = 0; j < cdf.size(); ++j)
    if (u <= cdf[j]) return static_cast<int>(j);
  return static_cast<int>(cdf.size()) - 1;
}

std::pair<std::int32_t, std::int32_t> TreeArena::children(std::int32_t v) {
  if (n_children_[v] >= 0) return {first_child_[v], n_children_[v]};
  if (aborted_) return {-1, 0};

  int n_backbone = 0;
  int n_trap = 0;
  switch (mode_) {
    case Mode::plain:
      n_trap = law_.sample(stream_);
      break;
    case Mode::subcritical_trap:
      n_trap = analytics_->h->sample(stream_);
      break;
    case Mode::harris:
      if (backbone_[v]) {
        n_backbone = analytics_->g.sample(stream_);
        if (!analytics_->bud_cdf_by_deg.empty())
          n_trap = sample_bud_count(n_backbone);
      } else {
        n_trap = analytics_->h->sample(stream_);
      }
      break;
    case Mode::binary_with_pipes:
      if (backbone_[v]) {
        n_backbone = 2;
        n_trap = 1;  // pipe root
      } else {
        n_trap = 1;  // pipes are infinite unary rays
      }
      break;
  }

  const std::size_t total = static_cast<std::size_t>(n_backbone + n_trap);
  if (parent_.size() + total > node_cap_) {
    aborted_ = true;
    n_children_[v] = 0;
    first_child_[v] = -1;
    return {-1, 0};
  }
  const auto first = static_cast<std::int32_t>(parent_.size());
  for (int i = 0; i < n_backbone; ++i) add_node(v, true);
  for (int i = 0; i < n_trap; ++i) add_node(v, false);
  first_child_[v] = total > 0 ? first : -1;
  n_children_[v] = static_cast<std::int32_t>(total);
  if (bias_law_) {
    double s = 0.0;
    for (std::int32_t c = first; c < first + n_children_[v]; ++c)
      s += marks_[c];
    mark_sum_[v] = s;
  }
  return {first_child_[v], n_children_[v]};
}

}  // namespace rwlab
