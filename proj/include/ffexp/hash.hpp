#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ffexp {

/// Incremental FNV-1a (64 bit).
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes)
  {
    for (unsigned char c : bytes) {
      h_ ^= c;
      h_ *= 0x100000001b3ull;
    }
    return *this;
  }
  Fnv1a& add(std::uint64_t v)
  {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ull;
    }
    return *this;
  }
  std::uint64_t value() const { return h_; }
  std::string hex() const;

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

std::string to_hex(std::uint64_t v);

}  // namespace ffexp
