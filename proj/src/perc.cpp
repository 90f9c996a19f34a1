#include "rwlab/perc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <tuple>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "rwlab/parallel.hpp"

namespace rwlab {

namespace {

std::vector<double> normalized(std::vector<double> dir) {
  double norm = 0.0;
  for (double c : dir) norm += c * c;
  norm = std::sqrt(norm);
  if (!(norm > 0.0))
    throw std::invalid_argument("BiasVector: zero direction");
  for (double& c : dir) c /= norm;
  return dir;
}

// Union-find with path halving (construction only).
struct UnionFind {
  std::vector<std::int32_t> parent;
  explicit UnionFind(std::int64_t n) : parent(static_cast<std::size_t>(n)) {
    for (std::int64_t i = 0; i < n; ++i)
      parent[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
  }
  std::int32_t find(std::int32_t v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("PercBox: truncated stream");
  return v;
}

}  // namespace

BiasVector::BiasVector(double lambda_, std::vector<double> direction_)
    : lambda(lambda_), direction(normalized(std::move(direction_))) {
  if (lambda < 0.0) throw std::invalid_argument("BiasVector: lambda >= 0");
}

PercBox::PercBox(int d, std::vector<int> sides, double p, std::uint64_t seed)
    : d_(d), sides_(std::move(sides)), p_(p), seed_(seed) {
  if (d_ < 2) throw std::invalid_argument("PercBox: d >= 2 required");
  if (static_cast<int>(sides_.size()) != d_)
    throw std::invalid_argument("PercBox: sides must have d entries");
  for (int s : sides_)
    if (s < 2) throw std::invalid_argument("PercBox: sides >= 2 required");
  if (!(p_ > 0.0) || !(p_ < 1.0))
    throw std::invalid_argument("PercBox: p in (0,1) required");

  strides_.resize(static_cast<std::size_t>(d_));
  std::int64_t n = 1;
  for (int a = d_ - 1; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] = n;
    n *= sides_[static_cast<std::size_t>(a)];
  }
  n_vertices_ = n;
  if (n_vertices_ > (std::int64_t{1} << 31) - 2)
    throw std::invalid_argument("PercBox: box too large");

  edges_.assign(static_cast<std::size_t>(d_) * static_cast<std::size_t>(n), 0);
  Stream s = SeedTree(seed_).stream();
  for (int a = 0; a < d_; ++a) {
    const std::size_t base =
        static_cast<std::size_t>(a) * static_cast<std::size_t>(n_vertices_);
    for (std::int64_t v = 0; v < n_vertices_; ++v) {
      if (coord(v, a) >= sides_[static_cast<std::size_t>(a)] - 1) continue;
      if (s.u01() <= p_) {
        edges_[base + static_cast<std::size_t>(v)] = 1;
        ++open_edges_;
      }
    }
  }
  finalize_clusters();
}

void PercBox::finalize_clusters() {
  UnionFind uf(n_vertices_);
  for (int a = 0; a < d_; ++a) {
    const std::int64_t stride = strides_[static_cast<std::size_t>(a)];
    for (std::int64_t v = 0; v < n_vertices_; ++v) {
      if (coord(v, a) >= sides_[static_cast<std::size_t>(a)] - 1) continue;
      if (edge_open(v, a))
        uf.unite(static_cast<std::int32_t>(v),
                 static_cast<std::int32_t>(v + stride));
    }
  }
  label_.resize(static_cast<std::size_t>(n_vertices_));
  for (std::int64_t v = 0; v < n_vertices_; ++v)
    label_[static_cast<std::size_t>(v)] = uf.find(static_cast<std::int32_t>(v));

  cluster_sizes_.assign(static_cast<std::size_t>(n_vertices_), 0);
  touches_surface_.assign(static_cast<std::size_t>(n_vertices_), 0);
  for (std::int64_t v = 0; v < n_vertices_; ++v) {
    const auto l = static_cast<std::size_t>(label_[static_cast<std::size_t>(v)]);
    ++cluster_sizes_[l];
    if (on_surface(v)) touches_surface_[l] = 1;
  }
  for (std::int64_t v = 0; v < n_vertices_; ++v) {
    const auto l = label_[static_cast<std::size_t>(v)];
    if (cluster_sizes_[static_cast<std::size_t>(l)] > largest_size_) {
      largest_size_ = cluster_sizes_[static_cast<std::size_t>(l)];
      largest_label_ = l;
    }
  }
}

std::int64_t PercBox::edge_count() const {
  std::int64_t e = 0;
  for (int a = 0; a < d_; ++a) {
    std::int64_t cnt = 1;
    for (int b = 0; b < d_; ++b)
      cnt *= b == a ? sides_[static_cast<std::size_t>(b)] - 1
                    : sides_[static_cast<std::size_t>(b)];
    e += cnt;
  }
  return e;
}

std::int64_t PercBox::vertex_index(const std::vector<int>& coords) const {
  std::int64_t v = 0;
  for (int a = 0; a < d_; ++a) {
    const int c = coords[static_cast<std::size_t>(a)];
    if (c < 0 || c >= sides_[static_cast<std::size_t>(a)])
      throw std::out_of_range("PercBox: coordinate outside box");
    v += c * strides_[static_cast<std::size_t>(a)];
  }
  return v;
}

void PercBox::coords_of(std::int64_t v, std::vector<int>& coords) const {
  coords.resize(static_cast<std::size_t>(d_));
  for (int a = 0; a < d_; ++a) {
    coords[static_cast<std::size_t>(a)] = static_cast<int>(
        (v / strides_[static_cast<std::size_t>(a)]) %
        sides_[static_cast<std::size_t>(a)]);
  }
}

int PercBox::coord(std::int64_t v, int axis) const {
  return static_cast<int>((v / strides_[static_cast<std::size_t>(axis)]) %
                          sides_[static_cast<std::size_t>(axis)]);
}

std::int64_t PercBox::cluster_size(std::int64_t v) const {
  return cluster_sizes_[static_cast<std::size_t>(label_[static_cast<std::size_t>(v)])];
}

bool PercBox::cluster_touches_surface(std::int64_t v) const {
  return touches_surface_[static_cast<std::size_t>(
             label_[static_cast<std::size_t>(v)])] != 0;
}

bool PercBox::on_surface(std::int64_t v) const {
  for (int a = 0; a < d_; ++a) {
    const int c = coord(v, a);
    if (c == 0 || c == sides_[static_cast<std::size_t>(a)] - 1) return true;
  }
  return false;
}

void PercBox::serialize(std::ostream& os) const {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d_));
  for (int s : sides_) write_pod<std::int32_t>(os, s);
  write_pod<double>(os, p_);
  write_pod<std::uint64_t>(os, seed_);
  std::uint8_t byte = 0;
  int fill = 0;
  for (int a = 0; a < d_; ++a) {
    for (std::int64_t v = 0; v < n_vertices_; ++v) {
      if (coord(v, a) >= sides_[static_cast<std::size_t>(a)] - 1) continue;
      if (edge_open(v, a)) byte |= static_cast<std::uint8_t>(1u << fill);
      if (++fill == 8) {
        write_pod<std::uint8_t>(os, byte);
        byte = 0;
        fill = 0;
      }
    }
  }
  if (fill > 0) write_pod<std::uint8_t>(os, byte);
}

PercBox PercBox::deserialize(std::istream& is) {
  PercBox box;
  box.d_ = static_cast<int>(read_pod<std::uint32_t>(is));
  if (box.d_ < 2 || box.d_ > 16)
    throw std::runtime_error("PercBox: bad dimension in stream");
  box.sides_.resize(static_cast<std::size_t>(box.d_));
  for (auto& s : box.sides_) s = read_pod<std::int32_t>(is);
  box.p_ = read_pod<double>(is);
  box.seed_ = read_pod<std::uint64_t>(is);

  box.strides_.resize(static_cast<std::size_t>(box.d_));
  std::int64_t n = 1;
  for (int a = box.d_ - 1; a >= 0; --a) {
    box.strides_[static_cast<std::size_t>(a)] = n;
    n *= box.sides_[static_cast<std::size_t>(a)];
  }
  box.n_vertices_ = n;
  box.edges_.assign(
      static_cast<std::size_t>(box.d_) * static_cast<std::size_t>(n), 0);

  std::uint8_t byte = 0;
  int avail = 0;
  for (int a = 0; a < box.d_; ++a) {
    const std::size_t base =
        static_cast<std::size_t>(a) * static_cast<std::size_t>(n);
    for (std::int64_t v = 0; v < n; ++v) {
      if (box.coord(v, a) >= box.sides_[static_cast<std::size_t>(a)] - 1)
        continue;
      if (avail == 0) {
        byte = read_pod<std::uint8_t>(is);
        avail = 8;
      }
      if (byte & 1u) {
        box.edges_[base + static_cast<std::size_t>(v)] = 1;
        ++box.open_edges_;
      }
      byte >>= 1;
      --avail;
    }
  }
  box.finalize_clusters();
  return box;
}

PercWalkRecord conductance_walk(const PercBox& box, const BiasVector& bias,
                                std::int64_t start, std::int64_t n_steps,
                                Stream& stream,
                                const PercWalkOptions& options) {
  if (static_cast<int>(bias.direction.size()) != box.dim())
    throw std::invalid_argument("conductance_walk: direction dimension");
  if (box.cluster_label(start) != box.largest_cluster_label())
    throw std::invalid_argument(
        "conductance_walk: start must lie in the largest cluster");

  const int d = box.dim();
  // c(x, x +/- e_a) = e^{(2 x + e_a (+/-1)).l}; the common factor e^{2 x.l}
  // cancels in the transition probabilities, leaving weights e^{+/- l_a}.
  std::vector<double> w_fwd(static_cast<std::size_t>(d)),
      w_bwd(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    const double la =
        bias.lambda * bias.direction[static_cast<std::size_t>(a)];
    w_fwd[static_cast<std::size_t>(a)] = std::exp(la);
    w_bwd[static_cast<std::size_t>(a)] = std::exp(-la);
  }

  PercWalkRecord rec;
  rec.delta.assign(static_cast<std::size_t>(options.record_levels), -1);
  std::int64_t pos = start;
  double dot = 0.0;  // (X_n - X_0) . dir
  std::size_t next_sample = 0;
  int best_level = 0;

  struct Move {
    double w;
    std::int64_t to;
    double d_dot;
  };
  std::vector<Move> moves(2 * static_cast<std::size_t>(d));

  std::int64_t step = 1;
  for (; step <= n_steps; ++step) {
    double total = 0.0;
    int n_open = 0;
    for (int a = 0; a < d; ++a) {
      const int c = box.coord(pos, a);
      const std::int64_t stride = box.stride(a);
      const double dir_a = bias.direction[static_cast<std::size_t>(a)];
      if (c < box.sides()[static_cast<std::size_t>(a)] - 1 &&
          box.edge_open(pos, a)) {
        total += w_fwd[static_cast<std::size_t>(a)];
        moves[static_cast<std::size_t>(n_open++)] = {
            w_fwd[static_cast<std::size_t>(a)], pos + stride, dir_a};
      }
      if (c > 0 && box.edge_open(pos - stride, a)) {
        total += w_bwd[static_cast<std::size_t>(a)];
        moves[static_cast<std::size_t>(n_open++)] = {
            w_bwd[static_cast<std::size_t>(a)], pos - stride, -dir_a};
      }
    }
    if (n_open == 0) {
      // isolated vertex: absorbing self-loop
      while (next_sample < options.sample_steps.size()) {
        rec.dot_at.push_back(dot);
        ++next_sample;
      }
      step = n_steps;
      break;
    }
    const double u = stream.u01() * total;
    double acc = 0.0;
    int pick = n_open - 1;
    for (int i = 0; i < n_open; ++i) {
      acc += moves[static_cast<std::size_t>(i)].w;
      if (u <= acc) {
        pick = i;
        break;
      }
    }
    pos = moves[static_cast<std::size_t>(pick)].to;
    dot += moves[static_cast<std::size_t>(pick)].d_dot;

    while (best_level < options.record_levels &&
           dot >= static_cast<double>(best_level + 1) - 1e-12) {
      ++best_level;
      rec.delta[static_cast<std::size_t>(best_level) - 1] = step;
    }
    while (next_sample < options.sample_steps.size() &&
           options.sample_steps[next_sample] <= step) {
      rec.dot_at.push_back(dot);
      ++next_sample;
    }
    if (box.on_surface(pos)) {
      rec.exited = true;
      break;
    }
  }
  rec.steps = std::min(step, n_steps);
  rec.final_vertex = pos;
  return rec;
}

std::optional<double> backtrack(const PercBox& box, std::int64_t x,
                                const std::vector<double>& direction) {
  const auto dir = normalized(direction);
  if (!box.cluster_touches_surface(x)) return std::nullopt;
  const int d = box.dim();

  std::vector<int> xc, wc;
  box.coords_of(x, xc);

  const auto n = box.vertex_count();
  std::vector<double> cost(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
  // (cost, path length, vertex): deterministic lexicographic order
  using Entry = std::tuple<double, std::int64_t, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;

  auto back_height = [&](std::int64_t v) {
    double s = 0.0;
    for (int a = 0; a < d; ++a)
      s += static_cast<double>(xc[static_cast<std::size_t>(a)] -
                               box.coord(v, a)) *
           dir[static_cast<std::size_t>(a)];
    return s;
  };

  cost[static_cast<std::size_t>(x)] = 0.0;
  pq.emplace(0.0, 0, x);
  while (!pq.empty()) {
    const auto [c, len, v] = pq.top();
    pq.pop();
    if (c > cost[static_cast<std::size_t>(v)]) continue;
    if (box.on_surface(v)) return c;  // first surface pop is optimal
    for (int a = 0; a < d; ++a) {
      const std::int64_t stride = box.stride(a);
      const int vc = box.coord(v, a);
      for (int s = 0; s < 2; ++s) {
        std::int64_t w;
        if (s == 0) {
          if (vc >= box.sides()[static_cast<std::size_t>(a)] - 1 ||
              !box.edge_open(v, a))
            continue;
          w = v + stride;
        } else {
          if (vc <= 0 || !box.edge_open(v - stride, a)) continue;
          w = v - stride;
        }
        const double cand = std::max(c, back_height(w));
        if (cand < cost[static_cast<std::size_t>(w)] - 1e-15) {
          cost[static_cast<std::size_t>(w)] = cand;
          pq.emplace(cand, len + 1, w);
        }
      }
    }
  }
  return std::nullopt;  // unreachable given the surface precondition
}

ZetaEstimate zeta_estimate(int d, double p, const std::vector<double>& direction,
                           int n_max, std::size_t boxes, SeedTree seeds,
                           unsigned workers) {
  if (n_max < 3) throw std::invalid_argument("zeta_estimate: n_max >= 3");
  const int side = 4 * n_max + 1;
  const std::vector<int> sides(static_cast<std::size_t>(d), side);
  std::vector<int> mid(static_cast<std::size_t>(d), side / 2);

  constexpr std::size_t kBatches = 256;
  const std::size_t per_batch = (boxes + kBatches - 1) / kBatches;
  struct Batch {
    std::vector<std::int64_t> counts;
    std::size_t used = 0, skipped = 0;
  };
  auto batches = parallel_replicas<Batch>(
      kBatches,
      [&](std::size_t b) {
        Batch out;
        out.counts.assign(static_cast<std::size_t>(n_max) + 1, 0);
        Stream seeder = seeds.child(b).stream();
        for (std::size_t i = 0; i < per_batch; ++i) {
          PercBox box(d, sides, p, seeder.next_u64());
          const auto center = box.vertex_index(mid);
          if (!box.cluster_touches_surface(center)) {
            ++out.skipped;
            continue;
          }
          const auto bk = backtrack(box, center, direction);
          ++out.used;
          for (int n = 0; n <= n_max; ++n)
            if (*bk > static_cast<double>(n) + 1e-9)
              ++out.counts[static_cast<std::size_t>(n)];
        }
        return out;
      },
      workers);

  ZetaEstimate est;
  est.tail_counts.assign(static_cast<std::size_t>(n_max) + 1, 0);
  for (const auto& b : batches) {
    est.boxes_used += b.used;
    est.boxes_skipped += b.skipped;
    for (std::size_t i = 0; i < b.counts.size(); ++i)
      est.tail_counts[i] += b.counts[i];
  }
  if (est.boxes_used == 0) throw std::runtime_error("zeta_estimate: no boxes");

  // weighted fit over the populated cells; cells below five counts are
  // Poisson noise and are left out of the fit
  std::vector<double> xs, ys, ws;
  for (int n = 2; n <= n_max; ++n) {
    const auto c = est.tail_counts[static_cast<std::size_t>(n)];
    if (c < 5) continue;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(static_cast<double>(c) /
                          static_cast<double>(est.boxes_used)));
    ws.push_back(static_cast<double>(c));
  }
  if (xs.size() < 3)
    throw std::runtime_error("zeta_estimate: tail too thin to fit");
  const auto fit = least_squares(xs, ys, ws);
  est.zeta = -fit.slope;
  est.r2 = fit.r2;
  est.slope_stderr = fit.slope_stderr;
  est.flagged = est.tail_counts[static_cast<std::size_t>(n_max)] < 30;
  return est;
}

namespace {

// Deterministic search for a largest-cluster vertex near the wanted start.
std::optional<std::int64_t> find_start_near(const PercBox& box,
                                            const std::vector<int>& want,
                                            int radius) {
  std::vector<int> c(want);
  for (int r = 0; r <= radius; ++r) {
    // scan the L1 sphere of radius r around the wanted coordinates (d=2
    // loops suffice for higher d too: only the first two axes are varied)
    for (int dx = -r; dx <= r; ++dx) {
      const int rem = r - std::abs(dx);
      for (int dy : {-rem, rem}) {
        c = want;
        c[0] += dx;
        c[1] += dy;
        bool ok = true;
        for (int a = 0; a < box.dim(); ++a)
          if (c[static_cast<std::size_t>(a)] < 0 ||
              c[static_cast<std::size_t>(a)] >=
                  box.sides()[static_cast<std::size_t>(a)])
            ok = false;
        if (!ok) continue;
        const auto v = box.vertex_index(c);
        if (box.cluster_label(v) == box.largest_cluster_label()) return v;
        if (rem == 0) break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<SpeedCurvePoint> speed_curve(
    int d, double p, const std::vector<double>& direction,
    const std::vector<double>& lambdas, std::int64_t steps,
    std::size_t replicas, const std::vector<int>& sides,
    const std::vector<int>& start_coords, int delta_levels, SeedTree seeds,
    unsigned workers) {
  std::vector<SpeedCurvePoint> out;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const BiasVector bias(lambdas[li], direction);
    struct Row {
      double speed = 0.0;
      bool ok = false;
      std::vector<double> delta;
    };
    auto rows = parallel_replicas<Row>(
        replicas,
        [&](std::size_t r) {
          Row row;
          SeedTree rep = seeds.child(li).child(r);
          PercBox box(d, sides, p, rep.child(0).stream().next_u64());
          const auto start = find_start_near(box, start_coords, 40);
          if (!start) return row;
          Stream walk = rep.child(1).stream();
          PercWalkOptions opt;
          opt.sample_steps = {steps};
          opt.record_levels = delta_levels;
          const auto rec =
              conductance_walk(box, bias, *start, steps, walk, opt);
          if (rec.exited) return row;  // truncated: excluded
          row.ok = true;
          row.speed = rec.dot_at[0] / static_cast<double>(steps);
          if (delta_levels > 0) {
            row.delta.reserve(static_cast<std::size_t>(delta_levels));
            for (auto v : rec.delta) row.delta.push_back(static_cast<double>(v));
          }
          return row;
        },
        workers);

    SpeedCurvePoint pt;
    pt.lambda = lambdas[li];
    double sum = 0.0, sum2 = 0.0;
    std::size_t used = 0;
    std::vector<std::vector<double>> delta_rows;
    for (const auto& row : rows) {
      if (!row.ok) {
        ++pt.truncated;
        continue;
      }
      ++used;
      sum += row.speed;
      sum2 += row.speed * row.speed;
      if (delta_levels > 0) {
        bool complete = true;
        for (double v : row.delta)
          if (v < 0) complete = false;
        if (complete) delta_rows.push_back(row.delta);
      }
    }
    if (used == 0)
      throw std::runtime_error("speed_curve: every replica was truncated");
    const double n = static_cast<double>(used);
    pt.speed.method = "perc-speed";
    pt.speed.replicas = used;
    pt.speed.estimate = sum / n;
    const double var = std::max(0.0, sum2 / n - pt.speed.estimate * pt.speed.estimate);
    pt.speed.std_error = std::sqrt(var / n);
    pt.speed.ci_lo = pt.speed.estimate - 1.96 * pt.speed.std_error;
    pt.speed.ci_hi = pt.speed.estimate + 1.96 * pt.speed.std_error;

    if (delta_levels > 0 && delta_rows.size() >= 10) {
      std::vector<double> grid;
      for (int l = 1; l <= delta_levels; ++l)
        grid.push_back(static_cast<double>(l));
      Stream boot = seeds.child(0x626f6f74).child(li).stream();
      pt.delta_slope = loglog_slope_of_medians(grid, delta_rows, 500, boot);
      pt.has_delta_slope = true;
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace rwlab
