#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"

namespace rwlab {

// Bias strength and unit direction (input direction is normalized).
struct BiasVector {
  double lambda;
  std::vector<double> direction;

  BiasVector(double lambda_, std::vector<double> direction_);
};

// Finite box of Z^d with i.i.d. open edges (retention p), union-find
// cluster labels finalized at construction, immutable afterwards. Vertices
// are row-major indices; edges live on (v, v + e_axis).
class PercBox {
 public:
  PercBox(int d, std::vector<int> sides, double p, std::uint64_t seed);

  int dim() const { return d_; }
  const std::vector<int>& sides() const { return sides_; }
  double retention() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t vertex_count() const { return n_vertices_; }
  std::int64_t edge_count() const;
  std::int64_t open_edge_count() const { return open_edges_; }

  std::int64_t vertex_index(const std::vector<int>& coords) const;
  void coords_of(std::int64_t v, std::vector<int>& coords) const;
  int coord(std::int64_t v, int axis) const;
  std::int64_t stride(int axis) const {
    return strides_[static_cast<std::size_t>(axis)];
  }

  // Edge (v, v + e_axis); callers must keep coord(v, axis) < side-1.
  bool edge_open(std::int64_t v, int axis) const {
    return edges_[static_cast<std::size_t>(axis) * static_cast<std::size_t>(n_vertices_) +
                  static_cast<std::size_t>(v)] != 0;
  }

  std::int64_t cluster_label(std::int64_t v) const { return label_[static_cast<std::size_t>(v)]; }
  std::int64_t cluster_size(std::int64_t v) const;
  std::int64_t largest_cluster_label() const { return largest_label_; }
  std::int64_t largest_cluster_size() const { return largest_size_; }
  bool cluster_touches_surface(std::int64_t v) const;
  bool on_surface(std::int64_t v) const;

  // Portable binary layout: u32 d; i32 sides[d]; f64 p; u64 seed; then the
  // edge bitmap, axis-major, vertices row-major, bits packed LSB-first.
  void serialize(std::ostream& os) const;
  static PercBox deserialize(std::istream& is);

 private:
  PercBox() = default;
  void finalize_clusters();

  int d_ = 0;
  std::vector<int> sides_;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
  std::int64_t n_vertices_ = 0;
  std::vector<std::int64_t> strides_;
  std::vector<std::uint8_t> edges_;  // axis * n_vertices + v
  std::int64_t open_edges_ = 0;
  std::vector<std::int32_t> label_;
  std::vector<std::int64_t> cluster_sizes_;   // by label
  std::vector<std::uint8_t> touches_surface_; // by label
  std::int64_t largest_label_ = -1;
  std::int64_t largest_size_ = 0;
};

struct PercWalkOptions {
  std::vector<std::int64_t> sample_steps;  // sorted; record X.l there
  int record_levels = 0;                   // delta_n = first step with X.l >= n
};

struct PercWalkRecord {
  std::vector<double> dot_at;        // X.l at the sampled steps
  std::vector<std::int64_t> delta;   // -1 where the level was not reached
  std::int64_t steps = 0;
  bool exited = false;               // reached the box surface (truncated)
  std::int64_t final_vertex = -1;
};

// Conductance-biased walk: p(x,y) proportional to e^{(x+y).l} over open
// edges (self-loop when isolated). The start must lie in the largest
// cluster; the walk stops at the box surface or after n_steps.
PercWalkRecord conductance_walk(const PercBox& box, const BiasVector& bias,
                                std::int64_t start, std::int64_t n_steps,
                                Stream& stream,
                                const PercWalkOptions& options = {});

// Backtrack function BK(x) on the box: the minimum over open paths from x
// to the box surface of the running maximum of (x - p).dir, by minimax
// Dijkstra (deterministic tie-breaking on cost, then path length, then
// vertex index). Returns nullopt when x's cluster does not reach the
// surface (the vertex is outside the box's infinite-cluster proxy).
std::optional<double> backtrack(const PercBox& box, std::int64_t x,
                                const std::vector<double>& direction);

struct ZetaEstimate {
  double zeta = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::vector<std::int64_t> tail_counts;  // #{BK(0) > n}, n = 0..n_max
  std::size_t boxes_used = 0;
  std::size_t boxes_skipped = 0;  // center cluster missed the surface
  bool flagged = false;           // < 30 positive samples at n_max
};

// Exponential decay rate of P[BK(0) > n]: weighted linear fit of
// ln P_hat against n over n in [2, n_max] on boxes of side 4 n_max + 1.
// lambda_c = zeta/2 and alpha = zeta/(2 lambda) are exact post-processing.
ZetaEstimate zeta_estimate(int d, double p, const std::vector<double>& direction,
                           int n_max, std::size_t boxes, SeedTree seeds,
                           unsigned workers = 0);

struct SpeedCurvePoint {
  double lambda = 0.0;
  EstimateReport speed;          // mean X.l / n over non-truncated replicas
  std::size_t truncated = 0;
  EstimateReport delta_slope;    // ln delta_n / ln n (when levels requested)
  bool has_delta_slope = false;
};

// Directional speed estimates over a lambda grid. Box sides are explicit:
// walks that exit are truncated and excluded. delta_levels > 0 adds the
// sub-ballistic hitting-time slope per lambda.
std::vector<SpeedCurvePoint> speed_curve(
    int d, double p, const std::vector<double>& direction,
    const std::vector<double>& lambdas, std::int64_t steps,
    std::size_t replicas, const std::vector<int>& sides,
    const std::vector<int>& start_coords, int delta_levels, SeedTree seeds,
    unsigned workers = 0);

}  // namespace rwlab
