#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hsps {

// FNV-1a 64-bit; used for config provenance digests embedded in output files.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string digest_hex(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace hsps
