#include "eqed/random.hpp"

namespace eqed {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c, const Philox4x32::Key& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline Philox4x32::Key split(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter counter, Key key) noexcept {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(split(seed)), stream_(stream) {}

std::uint32_t CounterRng::next_u32() noexcept {
  if (used_ == 4) {
    const auto idx = split(block_index_++);
    const auto str = split(stream_);
    buffer_ = Philox4x32::block({idx[0], idx[1], str[0], str[1]}, key_);
    used_ = 0;
  }
  return buffer_[used_++];
}

std::uint64_t CounterRng::next_u64() noexcept {
  const std::uint64_t a = next_u32();
  const std::uint64_t b = next_u32();
  return (a << 32) | b;
}

double CounterRng::uniform() noexcept {
  const std::uint64_t a = next_u32();
  const std::uint64_t b = next_u32();
  const std::uint64_t bits = (a << 21) ^ (b >> 11);
  return static_cast<double>(bits) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t campaign_seed, std::uint64_t index) noexcept {
  const auto idx = split(index);
  const auto out = Philox4x32::block({idx[0], idx[1], 0x5eedu, 0u}, split(campaign_seed));
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace eqed
