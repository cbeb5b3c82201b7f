#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace fairscope {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used for seeding and for
// deriving independent per-item streams.
std::uint64_t SplitMix64(std::uint64_t& state);

// FNV-1a, 64-bit. Only used to fold string ids into seeds.
std::uint64_t Fnv1a64(std::string_view bytes);

// Seed for the stream dedicated to one item (a video, a segment, ...).
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view item_id);
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

// xoshiro256** 1.0 (Blackman & Vigna). State is expanded from a single
// 64-bit seed with SplitMix64, so every platform yields the same stream.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t Next();

  // Uniform in [0, bound), unbiased (rejection sampling). bound must be > 0.
  std::uint64_t Below(std::uint64_t bound);

  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform();

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace fairscope
