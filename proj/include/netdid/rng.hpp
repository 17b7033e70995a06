// Deterministic random number generation for simulation and sampling.
//
// Standard-library distributions are not bit-portable across implementations,
// so everything here is spelled out: xoshiro256++ (Blackman & Vigna) for the
// raw stream, splitmix64 for seeding and stream derivation, 53-bit uniforms,
// Box-Muller normals, rejection-sampled uniform integers, and a partial
// Fisher-Yates draw without replacement. Replications get independent streams
// via for_stream(base_seed, stream_index).
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "netdid/errors.hpp"

namespace netdid {

// splitmix64 finalizer; also used to derive per-stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for sub-stream `stream` of a base seed; injective enough for the
// handful of streams each replication uses.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream) {
  return mix64(base_seed) ^ mix64(mix64(stream) + 0x632be59bd9b4e019ULL);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Fill state with a splitmix64 chain as recommended by the xoshiro authors.
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      s = z ^ (z >> 31);
    }
  }

  static Rng for_stream(std::uint64_t base_seed, std::uint64_t stream) {
    return Rng(derive_seed(base_seed, stream));
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

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased integer on {0, ..., bound-1} by rejection.
  int uniform_int(int bound) {
    if (bound <= 0) throw InvalidInput("uniform_int: bound must be positive");
    const std::uint64_t b = std::uint64_t(bound);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return int(r % b);
  }

  // k distinct elements of pool via partial Fisher-Yates, in draw order.
  std::vector<int> sample_without_replacement(std::vector<int> pool, int k) {
    const int n = int(pool.size());
    if (k < 0 || k > n)
      throw InvalidInput("sample_without_replacement: k out of range");
    for (int i = 0; i < k; ++i) {
      const int j = i + uniform_int(n - i);
      std::swap(pool[std::size_t(i)], pool[std::size_t(j)]);
    }
    pool.resize(std::size_t(k));
    return pool;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace netdid
