#include "doctest.h"

#include "satett/rng.hpp"

#include <cmath>

using satett::Philox;

TEST_CASE("philox known-answer vectors") {
  // Random123 reference vectors for philox4x32-10
  auto b = Philox::block({0, 0, 0, 0}, {0, 0});
  CHECK(b == Philox::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  b = Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b == Philox::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  b = Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(b == Philox::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("stream words follow the counter layout") {
  const std::uint64_t seed = 0x0123456789abcdefULL;
  Philox rng(seed, 3);
  const std::array<std::uint32_t, 2> key{0x89abcdefu, 0x01234567u};
  for (std::uint32_t pos = 0; pos < 3; ++pos) {
    const auto expect = Philox::block({pos, 0, 3, 0}, key);
    for (auto w : expect) CHECK(rng.next_u32() == w);
  }
}

TEST_CASE("uniform doubles use 53 bits from two words") {
  Philox a(42), b(42);
  const auto w0 = b.next_u32();
  const auto w1 = b.next_u32();
  const double expect = ((w0 >> 5) * 67108864.0 + (w1 >> 6)) / 9007199254740992.0;
  CHECK(a.uniform() == expect);
}

TEST_CASE("same seed gives identical draws; different streams differ") {
  Philox a(7), b(7), c(7, 1);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    any_diff = any_diff || x != c.normal();
  }
  CHECK(any_diff);
}

TEST_CASE("normal draws have roughly unit moments") {
  Philox rng(2024);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    ss += x * x;
  }
  const double mean = s / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
  CHECK(std::abs(ss / n - 1.0) < 0.02);
}

TEST_CASE("below stays in range and bernoulli edge cases") {
  Philox rng(9);
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7u);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
}

TEST_CASE("derive_seed matches its definition") {
  CHECK(satett::derive_seed(5, 0) == (satett::mix64(5 ^ satett::mix64(1))));
  CHECK(satett::derive_seed(5, 1) != satett::derive_seed(5, 2));
  CHECK(satett::derive_seed(5, 1) != satett::derive_seed(6, 1));
}
