#include <doctest.h>

#include <array>
#include <set>
#include <string>

#include "fairscope/random.hpp"

using fairscope::DeriveSeed;
using fairscope::Xoshiro256;

TEST_CASE("splitmix64 reference outputs") {
  // First outputs for state 1234567 from the reference C implementation.
  std::uint64_t state = 1234567;
  CHECK(fairscope::SplitMix64(state) == 6457827717110365317ULL);
  CHECK(fairscope::SplitMix64(state) == 3203168211198807973ULL);
  CHECK(fairscope::SplitMix64(state) == 9817491932198370423ULL);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fairscope::Fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fairscope::Fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fairscope::Fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("same seed, same stream") {
  Xoshiro256 a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.Next();
    CHECK(x == b.Next());
    differs |= x != c.Next();
  }
  CHECK(differs);
}

TEST_CASE("below stays in range and hits every value") {
  Xoshiro256 rng(7);
  std::array<int, 7> hist{};
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.Below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(h > 800);
  CHECK(rng.Below(1) == 0);
}

TEST_CASE("uniform is in [0,1)") {
  Xoshiro256 rng(99);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
  const double v = rng.Uniform(-15.0, 15.0);
  CHECK(v >= -15.0);
  CHECK(v < 15.0);
}

TEST_CASE("derived seeds are distinct per item") {
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    seen.insert(DeriveSeed(5, "s" + std::to_string(i)));
    seen.insert(DeriveSeed(5, static_cast<std::uint64_t>(i)));
  }
  CHECK(seen.size() == 200);
  CHECK(DeriveSeed(5, "video") == DeriveSeed(5, "video"));
  CHECK(DeriveSeed(5, "video") != DeriveSeed(6, "video"));
}
