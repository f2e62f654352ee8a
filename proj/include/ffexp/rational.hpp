#pragma once

#include <string>
#include <vector>

#include "ffexp/poly.hpp"

namespace ffexp {

/// Element of F_p(t) kept in lowest terms with a monic denominator.
class RationalFunction {
 public:
  RationalFunction() = default;
  explicit RationalFunction(Poly num);
  /// Throws std::domain_error on a zero denominator.
  RationalFunction(Poly num, Poly den);

  static RationalFunction constant(const FieldParams& field, std::int64_t c);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  const FieldParams& field() const { return num_.field(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_one(); }

  RationalFunction inverse() const;
  std::string to_string() const;

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b);
  RationalFunction operator-() const { return RationalFunction(-num_, den_); }
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) = default;
  friend bool operator<(const RationalFunction& a, const RationalFunction& b);

 private:
  Poly num_;
  Poly den_;
};

/// Parses expressions such as "1/t", "(t+1)/(t^2+3)", "2*t-1".
RationalFunction parse_rational(const FieldParams& field, const std::string& text);

/// n x n matrix over F_p(t); row-major.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(unsigned n, std::vector<RationalFunction> entries);

  static RatMatrix identity(const FieldParams& field, unsigned n);

  unsigned dim() const { return n_; }
  const RationalFunction& at(unsigned i, unsigned j) const { return e_[i * n_ + j]; }
  const std::vector<RationalFunction>& entries() const { return e_; }
  const FieldParams& field() const { return e_.front().field(); }

  RationalFunction det() const;
  /// Throws std::domain_error when singular.
  RatMatrix inverse() const;
  std::string to_string() const;

  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b);
  friend bool operator==(const RatMatrix& a, const RatMatrix& b) = default;
  friend bool operator<(const RatMatrix& a, const RatMatrix& b);

 private:
  unsigned n_ = 0;
  std::vector<RationalFunction> e_;
};

/// Parses "[[1,t],[0,1]]" (entries are rational expressions in t).
RatMatrix parse_matrix(const FieldParams& field, const std::string& text);
/// Parses a ';'-separated list of matrices.
std::vector<RatMatrix> parse_matrix_list(const FieldParams& field, const std::string& text);

}  // namespace ffexp
