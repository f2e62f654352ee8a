#include "ffexp/poly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ffexp {

bool is_prime(std::uint64_t n)
{
  if (n < 2)
    return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

FieldParams::FieldParams(std::uint32_t prime) : FieldParams(prime, prime) {}

FieldParams::FieldParams(std::uint32_t prime, std::uint64_t base_size) : p(prime), q0(base_size)
{
  if (!is_prime(prime))
    throw std::invalid_argument("characteristic " + std::to_string(prime) + " is not prime");
  std::uint64_t q = base_size;
  while (q % prime == 0 && q > 1)
    q /= prime;
  if (q != 1)
    throw std::invalid_argument("q0 must be a power of p");
}

Residue FieldParams::reduce(std::int64_t v) const
{
  std::int64_t r = v % static_cast<std::int64_t>(p);
  return static_cast<Residue>(r < 0 ? r + p : r);
}

Residue FieldParams::pow(Residue a, std::uint64_t e) const
{
  std::uint64_t result = 1, base = a % p;
  while (e) {
    if (e & 1)
      result = result * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return static_cast<Residue>(result);
}

Residue FieldParams::inv(Residue a) const
{
  if (a % p == 0)
    throw std::domain_error("inverse of zero in F_p");
  return pow(a, p - 2);
}

// ---------------------------------------------------------------------------

Poly::Poly(const FieldParams& field, std::vector<Residue> coeffs) : field_(field), coeffs_(std::move(coeffs))
{
  for (auto& c : coeffs_)
    c %= field_.p;
  normalize();
}

Poly::Poly(const FieldParams& field, std::initializer_list<std::int64_t> coeffs) : field_(field)
{
  coeffs_.reserve(coeffs.size());
  for (auto c : coeffs)
    coeffs_.push_back(field_.reduce(c));
  normalize();
}

Poly Poly::constant(const FieldParams& field, std::int64_t c)
{
  return Poly(field, std::vector<Residue>{field.reduce(c)});
}

Poly Poly::monomial(const FieldParams& field, unsigned k, Residue c)
{
  std::vector<Residue> v(k + 1, 0);
  v[k] = c;
  return Poly(field, std::move(v));
}

Poly Poly::monic_from_index(const FieldParams& field, unsigned deg, std::uint64_t index)
{
  std::vector<Residue> v(deg + 1, 0);
  for (unsigned i = 0; i < deg; ++i) {
    v[i] = static_cast<Residue>(index % field.p);
    index /= field.p;
  }
  v[deg] = 1;
  return Poly(field, std::move(v));
}

Poly Poly::from_code(const FieldParams& field, std::uint64_t code)
{
  std::vector<Residue> v;
  while (code) {
    v.push_back(static_cast<Residue>(code % field.p));
    code /= field.p;
  }
  return Poly(field, std::move(v));
}

void Poly::normalize()
{
  while (!coeffs_.empty() && coeffs_.back() == 0)
    coeffs_.pop_back();
}

std::optional<unsigned> Poly::degree() const
{
  if (coeffs_.empty())
    return std::nullopt;
  return static_cast<unsigned>(coeffs_.size() - 1);
}

unsigned Poly::deg() const
{
  if (coeffs_.empty())
    throw std::domain_error("degree of the zero polynomial");
  return static_cast<unsigned>(coeffs_.size() - 1);
}

Poly Poly::monic() const
{
  if (is_zero() || is_monic())
    return *this;
  return scaled(field_.inv(leading()));
}

Poly Poly::scaled(Residue c) const
{
  std::vector<Residue> v(coeffs_);
  for (auto& x : v)
    x = field_.mul(x, c);
  return Poly(field_, std::move(v));
}

Poly Poly::derivative() const
{
  if (coeffs_.size() <= 1)
    return zero(field_);
  std::vector<Residue> v(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i)
    v[i - 1] = field_.mul(coeffs_[i], static_cast<Residue>(i % field_.p));
  return Poly(field_, std::move(v));
}

Residue Poly::eval(Residue x) const
{
  Residue acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = field_.add(field_.mul(acc, x), *it);
  return acc;
}

std::uint64_t Poly::code() const
{
  std::uint64_t c = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    c = c * field_.p + *it;
  return c;
}

std::string Poly::to_string() const
{
  if (is_zero())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    Residue c = coeffs_[i];
    if (c == 0)
      continue;
    if (!first)
      os << '+';
    first = false;
    if (i == 0) {
      os << c;
    } else {
      if (c != 1)
        os << c << '*';
      os << 't';
      if (i > 1)
        os << '^' << i;
    }
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Poly& f) { return os << f.to_string(); }

Poly operator+(const Poly& a, const Poly& b)
{
  const auto& F = a.field_;
  std::vector<Residue> v(std::max(a.coeffs_.size(), b.coeffs_.size()), 0);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = F.add(a.coeff(static_cast<unsigned>(i)), b.coeff(static_cast<unsigned>(i)));
  return Poly(F, std::move(v));
}

Poly Poly::operator-() const
{
  std::vector<Residue> v(coeffs_);
  for (auto& x : v)
    x = field_.neg(x);
  return Poly(field_, std::move(v));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b)
{
  if (a.is_zero() || b.is_zero())
    return Poly::zero(a.field_);
  const std::uint64_t p = a.field_.p;
  std::vector<std::uint64_t> acc(a.coeffs_.size() + b.coeffs_.size() - 1, 0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0)
      continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
      acc[i + j] = (acc[i + j] + std::uint64_t{a.coeffs_[i]} * b.coeffs_[j]) % p;
  }
  std::vector<Residue> v(acc.begin(), acc.end());
  return Poly(a.field_, std::move(v));
}

bool operator<(const Poly& a, const Poly& b)
{
  if (a.coeffs_.size() != b.coeffs_.size())
    return a.coeffs_.size() < b.coeffs_.size();
  return std::lexicographical_compare(a.coeffs_.rbegin(), a.coeffs_.rend(), b.coeffs_.rbegin(), b.coeffs_.rend());
}

DivMod divmod(const Poly& a, const Poly& b)
{
  if (b.is_zero())
    throw std::domain_error("polynomial division by zero");
  const auto& F = a.field();
  if (a.is_zero() || a.deg() < b.deg())
    return {Poly::zero(F), a};
  std::vector<Residue> r(a.coeffs());
  const auto& bc = b.coeffs();
  const unsigned db = b.deg();
  const Residue lead_inv = F.inv(b.leading());
  std::vector<Residue> q(a.deg() - db + 1, 0);
  for (int i = static_cast<int>(a.deg()); i >= static_cast<int>(db); --i) {
    Residue c = F.mul(r[i], lead_inv);
    if (c == 0)
      continue;
    q[i - db] = c;
    for (unsigned j = 0; j <= db; ++j)
      r[i - db + j] = F.sub(r[i - db + j], F.mul(c, bc[j]));
  }
  r.resize(db);
  return {Poly(F, std::move(q)), Poly(F, std::move(r))};
}

Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).quotient; }
Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).remainder; }

Poly gcd(const Poly& a, const Poly& b)
{
  Poly x = a, y = b;
  while (!y.is_zero()) {
    Poly r = x % y;
    x = std::move(y);
    y = std::move(r);
  }
  return x.monic();
}

ExtGcd ext_gcd(const Poly& a, const Poly& b)
{
  const auto& F = a.field();
  Poly r0 = a, r1 = b;
  Poly s0 = Poly::constant(F, 1), s1 = Poly::zero(F);
  Poly t0 = Poly::zero(F), t1 = Poly::constant(F, 1);
  while (!r1.is_zero()) {
    auto [q, r] = divmod(r0, r1);
    r0 = std::exchange(r1, r);
    s0 = std::exchange(s1, s0 - q * s1);
    t0 = std::exchange(t1, t0 - q * t1);
  }
  if (r0.is_zero())
    return {r0, s0, t0};
  Residue c = F.inv(r0.leading());
  return {r0.scaled(c), s0.scaled(c), t0.scaled(c)};
}

Poly powmod(const Poly& base, std::uint64_t e, const Poly& m)
{
  const auto& F = base.field();
  Poly result = Poly::constant(F, 1) % m;
  Poly b = base % m;
  while (e) {
    if (e & 1)
      result = (result * b) % m;
    e >>= 1;
    if (e)
      b = (b * b) % m;
  }
  return result;
}

Poly invmod(const Poly& a, const Poly& m)
{
  auto eg = ext_gcd(a % m, m);
  if (!eg.g.is_one())
    throw std::domain_error("polynomial " + a.to_string() + " is not invertible modulo " + m.to_string());
  return eg.s % m;
}

bool is_squarefree(const Poly& f)
{
  if (f.is_zero())
    return false;
  if (f.deg() == 0)
    return true;
  Poly d = f.derivative();
  if (d.is_zero())
    return false;
  return gcd(f, d).is_one();
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n)
{
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0)
        n /= d;
    }
  }
  if (n > 1)
    out.push_back(n);
  return out;
}

namespace {

// t^(p^k) mod f, computed by k successive p-th powers.
Poly frobenius_power(const Poly& f, unsigned k)
{
  const auto& F = f.field();
  Poly x = Poly::monomial(F, 1) % f;
  for (unsigned i = 0; i < k; ++i)
    x = powmod(x, F.p, f);
  return x;
}

}  // namespace

bool is_irreducible(const Poly& f)
{
  if (f.is_zero() || f.deg() == 0)
    throw std::invalid_argument("irreducibility test on a constant");
  const unsigned d = f.deg();
  if (d == 1)
    return true;
  const auto& F = f.field();
  const Poly g = f.monic();
  const Poly t = Poly::monomial(F, 1);
  if (!(frobenius_power(g, d) == t % g))
    return false;
  for (auto r : prime_divisors(d)) {
    Poly h = frobenius_power(g, d / static_cast<unsigned>(r)) - t;
    if (!gcd(h, g).is_one())
      return false;
  }
  return true;
}

namespace {

// Null space of an n x n matrix over F_p (row-major), returned as basis rows.
std::vector<std::vector<Residue>> null_space(std::vector<std::vector<Residue>> m, const FieldParams& F)
{
  const std::size_t n = m.size();
  // Solve v * m = 0 by transposing into column elimination on m^T.
  std::vector<std::vector<Residue>> a(n, std::vector<Residue>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[j][i] = m[i][j];
  std::vector<int> pivot_col_of_row;
  std::vector<int> where(n, -1);
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t sel = row;
    while (sel < n && a[sel][col] == 0)
      ++sel;
    if (sel == n)
      continue;
    std::swap(a[sel], a[row]);
    Residue inv = F.inv(a[row][col]);
    for (auto& x : a[row])
      x = F.mul(x, inv);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != row && a[i][col] != 0) {
        Residue c = a[i][col];
        for (std::size_t j = 0; j < n; ++j)
          a[i][j] = F.sub(a[i][j], F.mul(c, a[row][j]));
      }
    }
    where[col] = static_cast<int>(row);
    ++row;
  }
  std::vector<std::vector<Residue>> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (where[free] != -1)
      continue;
    std::vector<Residue> v(n, 0);
    v[free] = 1;
    for (std::size_t col = 0; col < n; ++col)
      if (where[col] != -1)
        v[col] = F.neg(a[where[col]][free]);
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

std::vector<Poly> factor_squarefree_poly(const Poly& f)
{
  if (f.is_zero() || !f.is_monic())
    throw std::invalid_argument("factorization requires a monic nonzero polynomial");
  if (!is_squarefree(f))
    throw std::invalid_argument("polynomial " + f.to_string() + " is not square-free");
  const auto& F = f.field();
  const unsigned n = f.deg();
  if (n == 0)
    return {};
  if (n == 1)
    return {f};

  // Berlekamp matrix Q: row i holds t^(i p) mod f; kernel of Q - I.
  std::vector<std::vector<Residue>> q(n, std::vector<Residue>(n, 0));
  Poly tp = powmod(Poly::monomial(F, 1), F.p, f);
  Poly row = Poly::constant(F, 1);
  for (unsigned i = 0; i < n; ++i) {
    for (unsigned j = 0; j < n; ++j)
      q[i][j] = row.coeff(j);
    q[i][i] = F.sub(q[i][i], 1);
    row = (row * tp) % f;
  }
  auto basis = null_space(q, F);
  const std::size_t k = basis.size();

  std::vector<Poly> factors{f};
  for (const auto& vec : basis) {
    if (factors.size() == k)
      break;
    Poly v(F, vec);
    if (v.deg() == 0)
      continue;
    std::vector<Poly> next;
    for (const auto& g : factors) {
      if (g.deg() == 1) {
        next.push_back(g);
        continue;
      }
      // g = prod_s gcd(v - s, g) since v^p - v vanishes mod f.
      Poly rest = g;
      for (Residue s = 0; s < F.p && rest.deg() > 0; ++s) {
        Poly h = gcd(v - Poly::constant(F, s), rest);
        if (h.deg() > 0) {
          next.push_back(h);
          rest = rest / h;
        }
      }
    }
    factors = std::move(next);
  }
  for (auto& g : factors)
    g = g.monic();
  std::sort(factors.begin(), factors.end());
  return factors;
}

namespace {

int moebius(std::uint64_t n)
{
  int mu = 1;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      n /= d;
      if (n % d == 0)
        return 0;
      mu = -mu;
    }
  }
  if (n > 1)
    mu = -mu;
  return mu;
}

}  // namespace

std::uint64_t count_irreducibles(std::uint64_t p, unsigned d)
{
  if (d == 0)
    throw std::invalid_argument("degree must be positive");
  __int128 total = 0;
  for (unsigned e = 1; e <= d; ++e) {
    if (d % e != 0)
      continue;
    __int128 pe = 1;
    for (unsigned i = 0; i < e; ++i)
      pe *= p;
    total += moebius(d / e) * pe;
  }
  return static_cast<std::uint64_t>(total / d);
}

std::vector<Poly> monic_irreducibles(const FieldParams& field, unsigned d)
{
  std::uint64_t count = 1;
  for (unsigned i = 0; i < d; ++i)
    count *= field.p;
  std::vector<Poly> out;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    Poly f = Poly::monic_from_index(field, d, idx);
    if (is_irreducible(f))
      out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class PolyParser {
 public:
  PolyParser(const FieldParams& field, const std::string& text) : field_(field)
  {
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c)))
        s_.push_back(c);
  }

  Poly parse()
  {
    Poly p = sum();
    if (pos_ != s_.size())
      fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const
  {
    throw std::invalid_argument("cannot parse polynomial '" + s_ + "': " + msg + " at " + std::to_string(pos_));
  }
  bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

  Poly sum()
  {
    bool negate = false;
    if (peek('-')) {
      negate = true;
      ++pos_;
    } else if (peek('+')) {
      ++pos_;
    }
    Poly acc = product();
    if (negate)
      acc = -acc;
    while (peek('+') || peek('-')) {
      char op = s_[pos_++];
      Poly rhs = product();
      acc = op == '+' ? acc + rhs : acc - rhs;
    }
    return acc;
  }

  Poly product()
  {
    Poly acc = power();
    while (peek('*')) {
      ++pos_;
      acc = acc * power();
    }
    return acc;
  }

  Poly power()
  {
    Poly base = atom();
    if (peek('^')) {
      ++pos_;
      std::uint64_t e = integer();
      Poly r = Poly::constant(field_, 1);
      for (std::uint64_t i = 0; i < e; ++i)
        r = r * base;
      return r;
    }
    return base;
  }

  std::uint64_t integer()
  {
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
      fail("expected integer");
    std::uint64_t v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      v = v * 10 + static_cast<std::uint64_t>(s_[pos_++] - '0');
    return v;
  }

  Poly atom()
  {
    if (peek('t')) {
      ++pos_;
      return Poly::monomial(field_, 1);
    }
    if (peek('(')) {
      ++pos_;
      Poly inner = sum();
      if (!peek(')'))
        fail("expected ')'");
      ++pos_;
      return inner;
    }
    return Poly::constant(field_, static_cast<std::int64_t>(integer() % field_.p));
  }

  FieldParams field_;
  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly parse_poly(const FieldParams& field, const std::string& text) { return PolyParser(field, text).parse(); }

void to_json(nlohmann::json& j, const Poly& f) { j = f.coeffs(); }

Poly poly_from_json(const FieldParams& field, const nlohmann::json& j)
{
  std::vector<std::int64_t> raw = j.get<std::vector<std::int64_t>>();
  std::vector<Residue> v;
  for (auto c : raw)
    v.push_back(field.reduce(c));
  return Poly(field, std::move(v));
}

}  // namespace ffexp
