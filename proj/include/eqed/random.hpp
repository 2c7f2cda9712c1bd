#pragma once

#include <array>
#include <cstdint>

namespace eqed {

/// Philox4x32-10 block function (Salmon et al., Random123). Pure: the output
/// depends only on (counter, key), which makes every draw addressable.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Sequential stream over Philox4x32-10.
///
/// Identity of draw i (0-based) in stream (seed, stream):
///   key     = {lo32(seed), hi32(seed)}
///   counter = {lo32(i / 4), hi32(i / 4), lo32(stream), hi32(stream)}
///   value   = block(counter, key)[i % 4]
/// Doubles consume two consecutive 32-bit words (a, b) and map to
/// ((a << 21) ^ (b >> 11)) * 2^-53 in [0, 1).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

/// Seed for realization `index` of a campaign: the first two words of
/// block({lo32(index), hi32(index), 0x5eed, 0}, key(campaign_seed)).
std::uint64_t derive_seed(std::uint64_t campaign_seed, std::uint64_t index) noexcept;

}  // namespace eqed
