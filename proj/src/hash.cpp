#include "ffexp/hash.hpp"

namespace ffexp {

std::string to_hex(std::uint64_t v)
{
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4)
    s[i] = digits[v & 0xf];
  return s;
}

std::string Fnv1a::hex() const { return to_hex(h_); }

}  // namespace ffexp
