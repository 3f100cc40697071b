#pragma once

#include <array>
#include <cstdint>

namespace satett {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Bit-level contract: the 64-bit seed forms the key (k0 = low word,
/// k1 = high word). The 128-bit counter is (position low, position high,
/// stream low, stream high); each block yields four 32-bit words consumed
/// in order. Doubles take 53 bits from two consecutive words:
/// ((w0 >> 5) * 2^26 + (w1 >> 6)) * 2^-53. Normals use Box-Muller with the
/// cosine branch first and the sine branch cached.
class Philox {
public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  static Block block(Block counter, std::array<std::uint32_t, 2> key);

  std::uint32_t next_u32();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  bool bernoulli(double p);
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t position_ = 0;
  std::uint64_t stream_;
  Block buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for replication `index` under `base`: mix64(base ^ mix64(index + 1)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace satett
