#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ffexp/rational.hpp"
#include "ffexp/ring.hpp"

namespace ffexp {

/// Square matrix (n <= 4) over a QuotientRing, row-major.
struct Mat {
  std::uint8_t n = 0;
  std::array<Code, 16> e{};

  Code& operator()(unsigned i, unsigned j) { return e[i * n + j]; }
  Code operator()(unsigned i, unsigned j) const { return e[i * n + j]; }
  friend bool operator==(const Mat& a, const Mat& b) = default;
};

/// How matrices are identified when enumerating a group.
enum class Quotient {
  Linear,      ///< matrices as they are
  PlusMinus,   ///< M ~ -M (PSL-style)
  Projective,  ///< M ~ cM for units c (PGL-style; fields only)
};

std::string to_string(Quotient q);

/// The matrix algebra M_n(F_p[t]/<f>).
class MatAlgebra {
 public:
  MatAlgebra(std::shared_ptr<const QuotientRing> ring, unsigned n);

  const QuotientRing& ring() const { return *ring_; }
  std::shared_ptr<const QuotientRing> ring_ptr() const { return ring_; }
  unsigned dim() const { return n_; }

  Mat zero() const;
  Mat identity() const;
  Mat scalar(Code c) const;
  Mat from_codes(const std::vector<Code>& entries) const;
  Mat from_ints(std::initializer_list<std::int64_t> entries) const;
  Mat mul(const Mat& a, const Mat& b) const;
  Mat neg(const Mat& a) const;
  Mat scale(const Mat& a, Code c) const;
  Code det(const Mat& a) const;
  Code trace(const Mat& a) const;
  /// Throws std::domain_error when det is not a unit.
  Mat inverse(const Mat& a) const;
  bool is_invertible(const Mat& a) const { return ring_->is_unit(det(a)); }

  /// Representative of the class of a under the given quotient.
  Mat canonical(const Mat& a, Quotient q) const;
  /// Injective base-N encoding (requires N^(n^2) < 2^64).
  std::uint64_t encode(const Mat& a) const;
  Mat decode(std::uint64_t key) const;

  /// Entrywise reduction of a matrix over F_p[t, 1/r0]; throws
  /// std::domain_error when a denominator is not invertible modulo f.
  Mat reduce(const RatMatrix& h) const;

  std::string to_string(const Mat& a) const;

 private:
  std::shared_ptr<const QuotientRing> ring_;
  unsigned n_;
};

}  // namespace ffexp
