#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace rsim {

/// Streaming FNV-1a (64-bit). Used for configuration hashes, trace hash
/// chains, and model-checker state keys.
class Fnv1a {
 public:
  static constexpr uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr uint64_t kPrime = 0x100000001b3ULL;

  Fnv1a& bytes(const void* data, size_t len) {
    auto p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h_ = (h_ ^ p[i]) * kPrime;
    }
    return *this;
  }

  Fnv1a& u64(uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    return bytes(buf, 8);
  }

  Fnv1a& i32(int32_t v) { return u64(static_cast<uint64_t>(static_cast<uint32_t>(v))); }

  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = kOffset;
};

inline std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x0000000000000000";
  for (int i = 0; i < 16; ++i) {
    s[2 + i] = digits[(h >> (60 - 4 * i)) & 0xF];
  }
  return s;
}

}  // namespace rsim
