#pragma once

#include <cmath>
#include <cstdint>

namespace cst {

/// Deterministic xoshiro256++ generator with splitmix64 seeding.
///
/// The standard library engines are portable but its distributions are not;
/// every draw here is pinned down to the bit so that datasets and checkpoints
/// regenerate identically from a seed on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  /// Derives an independent stream, e.g. one per dataset example.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed;
    std::uint64_t a = splitmix64(x);
    x ^= 0x9e3779b97f4a7c15ULL * (index + 1);
    return Rng(a ^ splitmix64(x));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection-free modulo is fine here: n is
  /// always tiny compared with 2^64, the bias is below 2^-50.
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates shuffle of indices [0, n) written into out[0..n).
  template <typename IndexT>
  void shuffle(IndexT* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<IndexT>(i);
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      const IndexT tmp = out[i - 1];
      out[i - 1] = out[j];
      out[j] = tmp;
    }
  }

  /// Raw state words, for checkpointing.
  const std::uint64_t* state() const { return state_; }
  void set_state(const std::uint64_t words[4]) {
    for (int i = 0; i < 4; ++i) state_[i] = words[i];
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace cst
