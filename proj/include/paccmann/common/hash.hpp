//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace paccmann::common {

/// 64-bit FNV-1a over an explicit little-endian byte serialization.
/// Used for fingerprint neighborhood hashing and stable config digests;
/// not cryptographic.
class Fnv1a64 {
 public:
  static constexpr uint64_t kOffset = 14695981039346656037ull;
  static constexpr uint64_t kPrime = 1099511628211ull;

  Fnv1a64& bytes(const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) h_ = (h_ ^ b[i]) * kPrime;
    return *this;
  }
  Fnv1a64& u8(uint8_t v) { return bytes(&v, 1); }
  Fnv1a64& u32(uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    return bytes(b, 4);
  }
  Fnv1a64& u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    return u32(static_cast<uint32_t>(v >> 32));
  }
  Fnv1a64& i32(int32_t v) { return u32(static_cast<uint32_t>(v)); }
  /// String content followed by a NUL separator so concatenations cannot alias.
  Fnv1a64& str(std::string_view s) {
    bytes(s.data(), s.size());
    return u8(0);
  }
  uint64_t digest() const { return h_; }

 private:
  uint64_t h_ = kOffset;
};

inline uint64_t fnv1a64(std::string_view s) { return Fnv1a64().str(s).digest(); }

}  // namespace paccmann::common
