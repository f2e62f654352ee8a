#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffexp/poly.hpp"
#include "ffexp/rational.hpp"

namespace ffexp {

/// A place of F_p(t): v_l for a monic irreducible l, or v_infinity.
class Valuation {
 public:
  static Valuation finite(Poly l);
  static Valuation infinity(const FieldParams& field);

  bool is_infinite() const { return !prime_.has_value(); }
  const Poly& prime() const { return *prime_; }
  const FieldParams& field() const { return field_; }
  /// [K(v) : F_p]
  unsigned deg_v() const { return prime_ ? prime_->deg() : 1; }
  std::string to_string() const;

 private:
  Valuation() = default;
  FieldParams field_;
  std::optional<Poly> prime_;
};

/// Integer valuation; std::nullopt stands for +infinity (r = 0).
using ValuationValue = std::optional<std::int64_t>;

/// v_l(g) for a polynomial g.
ValuationValue poly_valuation(const Valuation& v, const Poly& g);
ValuationValue valuation_of(const Valuation& v, const RationalFunction& r);

/// |r|_v stored exactly as a power of p: |r|_v = p^exponent, with
/// exponent = -v(r) deg v. A missing exponent encodes |0|_v = 0.
struct LogNorm {
  std::optional<std::int64_t> p_exponent;

  bool is_zero() const { return !p_exponent.has_value(); }
  /// Natural log of the norm; -infinity for zero.
  double log(std::uint32_t p) const;
  friend bool operator==(const LogNorm&, const LogNorm&) = default;
  friend bool operator<(const LogNorm& a, const LogNorm& b);
};

LogNorm v_norm(const Valuation& v, const RationalFunction& r);

/// D(r0) together with v_infinity.
std::vector<Valuation> height_places(const Poly& r0);

/// max over entries and places of |h_ij|_v. Throws std::invalid_argument
/// when an entry's denominator has a prime factor outside the finite places
/// of `places`.
LogNorm matrix_height(const RatMatrix& h, const std::vector<Valuation>& places);

}  // namespace ffexp
