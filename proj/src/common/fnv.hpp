#pragma once

#include <cstdint>
#include <string_view>

namespace graphmem {

// FNV-1a, 64-bit.
class Fnv1a64 {
public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(const unsigned char *data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= data[i];
      state_ *= kPrime;
    }
  }

  void update(std::string_view s) {
    update(reinterpret_cast<const unsigned char *>(s.data()), s.size());
  }

  // Little-endian byte serialization, independent of host order.
  void update_u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i)
      buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    update(buf, 8);
  }

  std::uint64_t digest() const { return state_; }

private:
  std::uint64_t state_ = kOffsetBasis;
};

} // namespace graphmem
