#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ffexp/poly.hpp"

namespace ffexp {

/// Element of F_p[t]/<f> encoded by the base-p digits of its reduced representative.
using Code = std::uint32_t;

/// The ring F_p[t]/<f> with elements as dense integer codes. Constants c < p
/// have code c. Small rings (N <= 2401) use precomputed add/mul tables.
class QuotientRing {
 public:
  explicit QuotientRing(Poly f);

  const Poly& modulus() const { return f_; }
  const FieldParams& field() const { return f_.field(); }
  std::uint32_t p() const { return f_.field().p; }
  unsigned degree() const { return deg_; }
  /// N(f) = p^deg f
  std::uint32_t size() const { return n_; }
  bool is_field() const { return is_field_; }

  Code add(Code a, Code b) const;
  Code sub(Code a, Code b) const { return add(a, neg(b)); }
  Code neg(Code a) const;
  Code mul(Code a, Code b) const;
  Code pow(Code a, std::uint64_t e) const;
  bool is_unit(Code a) const { return inv_[a] != kNoInverse; }
  /// Throws std::domain_error on non-units.
  Code inv(Code a) const;

  Code from_int(std::int64_t c) const { return f_.field().reduce(c) % n_; }
  Code from_poly(const Poly& x) const;
  Poly to_poly(Code a) const { return Poly::from_code(field(), a); }
  /// The class of t.
  Code gen() const { return from_poly(Poly::monomial(field(), 1)); }

  /// Multiplicative generator; only for fields.
  Code primitive_element() const;
  /// True iff a^(q') = a, i.e. a lies in the subfield of size q'.
  bool in_subfield(Code a, std::uint64_t q_sub) const { return pow(a, q_sub) == a; }
  /// Square test in the multiplicative group (fields of odd order).
  bool is_square(Code a) const;
  /// Some square root of a square; throws otherwise.
  Code sqrt(Code a) const;

 private:
  static constexpr Code kNoInverse = 0xffffffffu;

  Code mul_slow(Code a, Code b) const;

  Poly f_;
  unsigned deg_;
  std::uint32_t n_;
  bool is_field_;
  std::vector<std::uint32_t> pow_p_;
  std::vector<std::uint16_t> add_table_, mul_table_;
  std::vector<Code> inv_;
};

/// Ring homomorphism F_p[t]/<l> -> F_p[s]/<m> for irreducible l, m with
/// deg l | deg m, sending t to a fixed root of l (the smallest code).
class FieldEmbedding {
 public:
  FieldEmbedding(const QuotientRing& small, const QuotientRing& big);
  Code operator()(Code a) const { return image_[a]; }
  /// Image of t.
  Code root() const { return root_; }
  /// Preimage if a lies in the image.
  std::optional<Code> preimage(Code a) const;

 private:
  Code root_ = 0;
  std::vector<Code> image_;
  std::vector<Code> preimage_;
};

/// A monic irreducible polynomial of degree d over F_p (first in Poly order).
Poly first_irreducible(const FieldParams& field, unsigned d);

}  // namespace ffexp
