#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rwlab {

namespace detail {

// 2x64 ARX block cipher in the Threefry style (20 rounds, key schedule
// every 4 rounds). Used as a keyed counter generator: one block of key
// material per (key, counter) pair, so streams are pure functions of the
// seed path and may be split or replayed freely.
struct Block2x64 {
  std::uint64_t x0, x1;
};

inline Block2x64 arx_block(std::uint64_t k0, std::uint64_t k1, std::uint64_t c0,
                           std::uint64_t c1) {
  constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ull;
  constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::uint64_t ks[3] = {k0, k1, kParity ^ k0 ^ k1};
  std::uint64_t x0 = c0 + ks[0];
  std::uint64_t x1 = c1 + ks[1];
  for (int r = 0; r < 20; ++r) {
    x0 += x1;
    x1 = std::rotl(x1, kRot[r % 8]);
    x1 ^= x0;
    if (r % 4 == 3) {
      const int s = r / 4 + 1;
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
    }
  }
  return {x0, x1};
}

// Counter tags keep stream output and child-key derivation in disjoint
// input domains of the block function.
constexpr std::uint64_t kStreamTag = 0;
constexpr std::uint64_t kChildTag = 0x5c1dd56e2b3c176bull;

// Maps a signed index into the unsigned counter domain (zig-zag).
inline std::uint64_t zigzag(std::int64_t x) {
  return (static_cast<std::uint64_t>(x) << 1) ^
         static_cast<std::uint64_t>(x >> 63);
}

}  // namespace detail

// A consumable random stream: a 128-bit key plus a block counter. Values
// depend only on the key and how many values were drawn, never on global
// state, so replicas on different threads produce identical sequences.
class Stream {
 public:
  using result_type = std::uint64_t;

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto b = detail::arx_block(k0_, k1_, ctr_++, detail::kStreamTag);
    spare_ = b.x1;
    have_spare_ = true;
    return b.x0;
  }

  // Uniform on (0,1], 53-bit resolution. Safe as input to -log(u) and to
  // Pareto inversion u^(-1/alpha), whose support boundary is u = 1.
  double u01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on (0,1): both endpoints excluded.
  double u01_open() {
    double u;
    do {
      u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  // Mean-one exponential.
  double exponential() { return -std::log(u01()); }

  // Standard normal (Box-Muller, one value per pair of uniforms).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(u01()));
    const double t = 6.283185307179586476925287 * u01_open();
    return r * std::cos(t);
  }

  // Unbiased uniform draw from {0, ..., n-1}.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r < threshold);
    return r % n;
  }

  bool bernoulli(double p) { return u01() <= p; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  friend class SeedTree;
  Stream(std::uint64_t k0, std::uint64_t k1) : k0_(k0), k1_(k1) {}

  std::uint64_t k0_, k1_;
  std::uint64_t ctr_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

// Splittable seed: a (root seed, path of child indices) pair identifies one
// stream. Identical pairs yield identical streams; distinct paths yield
// statistically independent streams. Splitting is cheap and side-effect
// free, so a replica hierarchy can be laid out before any work is done.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t root_seed) {
    const auto b = detail::arx_block(root_seed, 0x243f6a8885a308d3ull, 0, 0);
    k0_ = b.x0;
    k1_ = b.x1;
  }

  SeedTree child(std::uint64_t index) const {
    const auto b = detail::arx_block(k0_, k1_, index, detail::kChildTag);
    return SeedTree(b.x0, b.x1);
  }

  SeedTree child_signed(std::int64_t index) const {
    return child(detail::zigzag(index));
  }

  Stream stream() const { return Stream(k0_, k1_); }

 private:
  SeedTree(std::uint64_t k0, std::uint64_t k1) : k0_(k0), k1_(k1) {}
  std::uint64_t k0_, k1_;
};

}  // namespace rwlab
