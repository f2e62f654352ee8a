#include "ffexp/ring.hpp"

#include <limits>
#include <stdexcept>

namespace ffexp {

namespace {

constexpr std::uint32_t kTableLimit = 2401;

}  // namespace

QuotientRing::QuotientRing(Poly f) : f_(std::move(f))
{
  if (f_.is_zero() || f_.deg() == 0 || !f_.is_monic())
    throw std::invalid_argument("quotient ring needs a monic modulus of positive degree");
  deg_ = f_.deg();
  const std::uint32_t p = field().p;
  std::uint64_t n = 1;
  pow_p_.push_back(1);
  for (unsigned i = 0; i < deg_; ++i) {
    n *= p;
    if (n > (1u << 30))
      throw std::invalid_argument("quotient ring too large: " + f_.to_string());
    pow_p_.push_back(static_cast<std::uint32_t>(n));
  }
  n_ = static_cast<std::uint32_t>(n);
  is_field_ = is_irreducible(f_);

  if (n_ <= kTableLimit) {
    add_table_.resize(std::size_t{n_} * n_);
    mul_table_.resize(std::size_t{n_} * n_);
    for (Code a = 0; a < n_; ++a)
      for (Code b = a; b < n_; ++b) {
        Code s = 0;
        Code x = a, y = b;
        for (unsigned i = 0; i < deg_; ++i) {
          s += ((x % p + y % p) % p) * pow_p_[i];
          x /= p;
          y /= p;
        }
        add_table_[std::size_t{a} * n_ + b] = add_table_[std::size_t{b} * n_ + a] = static_cast<std::uint16_t>(s);
        Code m = mul_slow(a, b);
        mul_table_[std::size_t{a} * n_ + b] = mul_table_[std::size_t{b} * n_ + a] = static_cast<std::uint16_t>(m);
      }
  }

  inv_.assign(n_, kNoInverse);
  for (Code a = 1; a < n_; ++a) {
    if (inv_[a] != kNoInverse)
      continue;
    Poly x = to_poly(a);
    if (!gcd(x, f_).is_one())
      continue;
    Code b = from_poly(invmod(x, f_));
    inv_[a] = b;
    inv_[b] = a;
  }
}

Code QuotientRing::add(Code a, Code b) const
{
  if (!add_table_.empty())
    return add_table_[std::size_t{a} * n_ + b];
  const std::uint32_t p = field().p;
  Code s = 0;
  for (unsigned i = 0; i < deg_; ++i) {
    s += ((a % p + b % p) % p) * pow_p_[i];
    a /= p;
    b /= p;
  }
  return s;
}

Code QuotientRing::neg(Code a) const
{
  const std::uint32_t p = field().p;
  Code s = 0;
  for (unsigned i = 0; i < deg_; ++i) {
    Code d = a % p;
    s += (d == 0 ? 0 : p - d) * pow_p_[i];
    a /= p;
  }
  return s;
}

Code QuotientRing::mul_slow(Code a, Code b) const
{
  const std::uint32_t p = field().p;
  std::uint64_t x[32] = {}, y[32] = {}, z[64] = {};
  for (unsigned i = 0; i < deg_; ++i) {
    x[i] = a % p;
    y[i] = b % p;
    a /= p;
    b /= p;
  }
  for (unsigned i = 0; i < deg_; ++i)
    if (x[i])
      for (unsigned j = 0; j < deg_; ++j)
        z[i + j] = (z[i + j] + x[i] * y[j]) % p;
  for (unsigned k = 2 * deg_ - 1; k-- > deg_;) {
    const std::uint64_t c = z[k];
    if (c == 0)
      continue;
    for (unsigned i = 0; i < deg_; ++i)
      z[k - deg_ + i] = (z[k - deg_ + i] + (p - c) * f_.coeff(i)) % p;
    z[k] = 0;
  }
  Code r = 0;
  for (unsigned i = deg_; i-- > 0;)
    r = r * p + static_cast<Code>(z[i]);
  return r;
}

Code QuotientRing::mul(Code a, Code b) const
{
  if (!mul_table_.empty())
    return mul_table_[std::size_t{a} * n_ + b];
  return mul_slow(a, b);
}

Code QuotientRing::pow(Code a, std::uint64_t e) const
{
  Code r = 1 % n_;
  while (e) {
    if (e & 1)
      r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

Code QuotientRing::inv(Code a) const
{
  if (inv_[a] == kNoInverse)
    throw std::domain_error("element " + to_poly(a).to_string() + " is not a unit modulo " + f_.to_string());
  return inv_[a];
}

Code QuotientRing::from_poly(const Poly& x) const
{
  if (x.is_zero())
    return 0;
  if (x.field().p != field().p)
    throw std::invalid_argument("characteristic mismatch");
  if (x.deg() >= deg_)
    return static_cast<Code>((x % f_).code());
  return static_cast<Code>(x.code());
}

Code QuotientRing::primitive_element() const
{
  if (!is_field_)
    throw std::domain_error("primitive element requested in a non-field");
  const std::uint64_t order = n_ - 1;
  auto primes = prime_divisors(order);
  for (Code g = 1; g < n_; ++g) {
    bool ok = true;
    for (auto r : primes)
      if (pow(g, order / r) == 1) {
        ok = false;
        break;
      }
    if (ok)
      return g;
  }
  throw std::logic_error("no primitive element found");
}

bool QuotientRing::is_square(Code a) const
{
  if (a == 0)
    return true;
  if (!is_field_ || field().p == 2)
    throw std::domain_error("square test needs a field of odd order");
  return pow(a, (n_ - 1) / 2) == 1;
}

Code QuotientRing::sqrt(Code a) const
{
  if (a == 0)
    return 0;
  if (!is_square(a))
    throw std::domain_error("not a square");
  for (Code x = 1; x < n_; ++x)
    if (mul(x, x) == a)
      return x;
  throw std::logic_error("square root not found");
}

FieldEmbedding::FieldEmbedding(const QuotientRing& small, const QuotientRing& big)
{
  if (!small.is_field() || !big.is_field() || big.degree() % small.degree() != 0 || small.p() != big.p())
    throw std::invalid_argument("no field embedding between the given rings");
  const Poly& l = small.modulus();
  std::optional<Code> root;
  for (Code x = 0; x < big.size() && !root; ++x) {
    Code acc = 0;
    for (unsigned i = l.deg() + 1; i-- > 0;)
      acc = big.add(big.mul(acc, x), big.from_int(l.coeff(i)));
    if (acc == 0)
      root = x;
  }
  if (!root)
    throw std::logic_error("minimal polynomial has no root in the extension");
  root_ = *root;
  image_.resize(small.size());
  preimage_.assign(big.size(), std::numeric_limits<Code>::max());
  for (Code a = 0; a < small.size(); ++a) {
    Poly x = small.to_poly(a);
    Code acc = 0;
    if (!x.is_zero())
      for (unsigned i = x.deg() + 1; i-- > 0;)
        acc = big.add(big.mul(acc, *root), big.from_int(x.coeff(i)));
    image_[a] = acc;
    preimage_[acc] = a;
  }
}

std::optional<Code> FieldEmbedding::preimage(Code a) const
{
  Code b = preimage_[a];
  if (b == std::numeric_limits<Code>::max())
    return std::nullopt;
  return b;
}

Poly first_irreducible(const FieldParams& field, unsigned d)
{
  for (std::uint64_t i = 0;; ++i) {
    Poly f = Poly::monic_from_index(field, d, i);
    if (is_irreducible(f))
      return f;
  }
}

}  // namespace ffexp
