#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ffexp {

using Residue = std::uint32_t;

/// Characteristic and base-field size. Arithmetic accepts any prime p; the
/// hypotheses p > 5 and q0 > 7 are checked by experiment drivers only.
struct FieldParams {
  std::uint32_t p = 7;
  std::uint64_t q0 = 7;

  FieldParams() = default;
  explicit FieldParams(std::uint32_t prime);
  FieldParams(std::uint32_t prime, std::uint64_t base_size);

  bool meets_hypotheses() const { return p > 5 && q0 > 7; }

  Residue reduce(std::int64_t v) const;
  Residue add(Residue a, Residue b) const { return static_cast<Residue>((std::uint64_t{a} + b) % p); }
  Residue sub(Residue a, Residue b) const { return static_cast<Residue>((std::uint64_t{a} + p - b) % p); }
  Residue mul(Residue a, Residue b) const { return static_cast<Residue>((std::uint64_t{a} * b) % p); }
  Residue neg(Residue a) const { return a == 0 ? 0 : p - a; }
  Residue inv(Residue a) const;
  Residue pow(Residue a, std::uint64_t e) const;

  friend bool operator==(const FieldParams&, const FieldParams&) = default;
};

bool is_prime(std::uint64_t n);

/// Dense polynomial over F_p, lowest degree first. The zero polynomial has no
/// coefficients and degree() == std::nullopt (minus infinity).
class Poly {
 public:
  Poly() = default;
  Poly(const FieldParams& field, std::vector<Residue> coeffs);
  Poly(const FieldParams& field, std::initializer_list<std::int64_t> coeffs);

  static Poly zero(const FieldParams& field) { return Poly(field, std::vector<Residue>{}); }
  static Poly constant(const FieldParams& field, std::int64_t c);
  /// x^k
  static Poly monomial(const FieldParams& field, unsigned k, Residue c = 1);
  /// The monic polynomial of degree `deg` whose lower coefficients are the
  /// base-p digits of `index`.
  static Poly monic_from_index(const FieldParams& field, unsigned deg, std::uint64_t index);
  /// Polynomial whose coefficients are the base-p digits of `code`.
  static Poly from_code(const FieldParams& field, std::uint64_t code);

  const FieldParams& field() const { return field_; }
  const std::vector<Residue>& coeffs() const { return coeffs_; }

  bool is_zero() const { return coeffs_.empty(); }
  std::optional<unsigned> degree() const;
  /// Degree, throwing std::domain_error on the zero polynomial.
  unsigned deg() const;
  Residue coeff(unsigned i) const { return i < coeffs_.size() ? coeffs_[i] : 0; }
  Residue leading() const { return coeffs_.empty() ? 0 : coeffs_.back(); }
  bool is_monic() const { return !coeffs_.empty() && coeffs_.back() == 1; }
  bool is_one() const { return coeffs_.size() == 1 && coeffs_[0] == 1; }

  Poly monic() const;
  Poly derivative() const;
  Residue eval(Residue x) const;
  /// Base-p integer encoding of the coefficients (requires p^(deg+1) < 2^64).
  std::uint64_t code() const;

  std::string to_string() const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly operator-() const;
  Poly scaled(Residue c) const;

  friend bool operator==(const Poly& a, const Poly& b) { return a.field_.p == b.field_.p && a.coeffs_ == b.coeffs_; }
  /// Total order: degree first, then base-p encoding (leading coefficient most significant).
  friend bool operator<(const Poly& a, const Poly& b);

 private:
  void normalize();

  FieldParams field_;
  std::vector<Residue> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const Poly& f);

struct DivMod {
  Poly quotient;
  Poly remainder;
};

DivMod divmod(const Poly& a, const Poly& b);
Poly operator/(const Poly& a, const Poly& b);
Poly operator%(const Poly& a, const Poly& b);
/// Monic gcd; gcd(0, 0) = 0.
Poly gcd(const Poly& a, const Poly& b);
/// Extended gcd: returns g = gcd(a,b) (monic) and s,t with s*a + t*b = g.
struct ExtGcd {
  Poly g, s, t;
};
ExtGcd ext_gcd(const Poly& a, const Poly& b);
/// base^e mod m.
Poly powmod(const Poly& base, std::uint64_t e, const Poly& m);
/// Inverse of a modulo m; throws std::domain_error when gcd(a, m) != 1.
Poly invmod(const Poly& a, const Poly& m);

bool is_squarefree(const Poly& f);
/// Deterministic Rabin test. Throws std::invalid_argument on constants.
bool is_irreducible(const Poly& f);

/// Monic irreducible factors of a monic square-free f, sorted by operator<.
/// Uses Berlekamp's deterministic splitting.
std::vector<Poly> factor_squarefree_poly(const Poly& f);

/// Number of monic irreducible polynomials of degree d over F_p (Moebius formula).
std::uint64_t count_irreducibles(std::uint64_t p, unsigned d);

/// All monic irreducibles of degree d, in operator< order.
std::vector<Poly> monic_irreducibles(const FieldParams& field, unsigned d);

/// Distinct prime divisors of n.
std::vector<std::uint64_t> prime_divisors(std::uint64_t n);

/// Parses "c0+c1*t+c2*t^2" style strings (and "t", "-t^3", "(t+1)*(t+2)").
Poly parse_poly(const FieldParams& field, const std::string& text);

void to_json(nlohmann::json& j, const Poly& f);
Poly poly_from_json(const FieldParams& field, const nlohmann::json& j);

}  // namespace ffexp
