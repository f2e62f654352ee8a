#include "ffexp/matrix.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>


namespace ffexp {

std::string to_string(Quotient q)
{
  switch (q) {
    case Quotient::Linear:
      return "linear";
    case Quotient::PlusMinus:
      return "plusminus";
    case Quotient::Projective:
      return "projective";
  }
  return "?";
}

MatAlgebra::MatAlgebra(std::shared_ptr<const QuotientRing> ring, unsigned n) : ring_(std::move(ring)), n_(n)
{
  if (n == 0 || n > 4)
    throw std::invalid_argument("matrix dimension must be between 1 and 4");
  long double bits = static_cast<long double>(n * n) * std::log2(static_cast<long double>(ring_->size()));
  if (bits >= 64)
    throw std::invalid_argument("matrices over a ring of this size cannot be encoded in 64 bits");
}

Mat MatAlgebra::zero() const
{
  Mat m;
  m.n = static_cast<std::uint8_t>(n_);
  return m;
}

Mat MatAlgebra::identity() const { return scalar(1); }

Mat MatAlgebra::scalar(Code c) const
{
  Mat m = zero();
  for (unsigned i = 0; i < n_; ++i)
    m(i, i) = c;
  return m;
}

Mat MatAlgebra::from_codes(const std::vector<Code>& entries) const
{
  if (entries.size() != n_ * n_)
    throw std::invalid_argument("wrong number of matrix entries");
  Mat m = zero();
  for (unsigned i = 0; i < n_ * n_; ++i) {
    if (entries[i] >= ring_->size())
      throw std::invalid_argument("matrix entry out of range");
    m.e[i] = entries[i];
  }
  return m;
}

Mat MatAlgebra::from_ints(std::initializer_list<std::int64_t> entries) const
{
  std::vector<Code> c;
  for (auto v : entries)
    c.push_back(ring_->from_int(v));
  return from_codes(c);
}

Mat MatAlgebra::mul(const Mat& a, const Mat& b) const
{
  const QuotientRing& R = *ring_;
  Mat c = zero();
  for (unsigned i = 0; i < n_; ++i)
    for (unsigned j = 0; j < n_; ++j) {
      Code acc = 0;
      for (unsigned k = 0; k < n_; ++k)
        acc = R.add(acc, R.mul(a(i, k), b(k, j)));
      c(i, j) = acc;
    }
  return c;
}

Mat MatAlgebra::neg(const Mat& a) const
{
  Mat c = a;
  for (unsigned i = 0; i < n_ * n_; ++i)
    c.e[i] = ring_->neg(a.e[i]);
  return c;
}

Mat MatAlgebra::scale(const Mat& a, Code s) const
{
  Mat c = a;
  for (unsigned i = 0; i < n_ * n_; ++i)
    c.e[i] = ring_->mul(a.e[i], s);
  return c;
}

namespace {

Code det_rec(const QuotientRing& R, const Mat& a, unsigned n, unsigned row, unsigned used)
{
  if (row == n)
    return 1;
  Code acc = 0;
  int sign = 1;
  for (unsigned c = 0; c < n; ++c) {
    if (used & (1u << c))
      continue;
    if (a(row, c) != 0) {
      Code term = R.mul(a(row, c), det_rec(R, a, n, row + 1, used | (1u << c)));
      acc = sign > 0 ? R.add(acc, term) : R.sub(acc, term);
    }
    sign = -sign;
  }
  return acc;
}

}  // namespace

Code MatAlgebra::det(const Mat& a) const
{
  if (n_ == 2)
    return ring_->sub(ring_->mul(a(0, 0), a(1, 1)), ring_->mul(a(0, 1), a(1, 0)));
  return det_rec(*ring_, a, n_, 0, 0);
}

Code MatAlgebra::trace(const Mat& a) const
{
  Code t = 0;
  for (unsigned i = 0; i < n_; ++i)
    t = ring_->add(t, a(i, i));
  return t;
}

Mat MatAlgebra::inverse(const Mat& a) const
{
  const QuotientRing& R = *ring_;
  Code d = det(a);
  if (!R.is_unit(d))
    throw std::domain_error("matrix is not invertible");
  Code di = R.inv(d);
  Mat b = zero();
  if (n_ == 1) {
    b(0, 0) = di;
    return b;
  }
  if (n_ == 2) {
    b(0, 0) = R.mul(a(1, 1), di);
    b(1, 1) = R.mul(a(0, 0), di);
    b(0, 1) = R.mul(R.neg(a(0, 1)), di);
    b(1, 0) = R.mul(R.neg(a(1, 0)), di);
    return b;
  }
  for (unsigned i = 0; i < n_; ++i)
    for (unsigned j = 0; j < n_; ++j) {
      // Cofactor C_ji goes to entry (i, j).
      Mat m = zero();
      m.n = static_cast<std::uint8_t>(n_ - 1);
      unsigned r = 0;
      for (unsigned x = 0; x < n_; ++x) {
        if (x == j)
          continue;
        unsigned c = 0;
        for (unsigned y = 0; y < n_; ++y) {
          if (y == i)
            continue;
          m.e[r * (n_ - 1) + c] = a(x, y);
          ++c;
        }
        ++r;
      }
      Code cof = det_rec(R, m, n_ - 1, 0, 0);
      if ((i + j) % 2)
        cof = R.neg(cof);
      b(i, j) = R.mul(cof, di);
    }
  return b;
}

Mat MatAlgebra::canonical(const Mat& a, Quotient q) const
{
  switch (q) {
    case Quotient::Linear:
      return a;
    case Quotient::PlusMinus: {
      Mat b = neg(a);
      return encode(b) < encode(a) ? b : a;
    }
    case Quotient::Projective:
      for (unsigned i = 0; i < n_ * n_; ++i)
        if (a.e[i] != 0) {
          if (!ring_->is_unit(a.e[i]))
            throw std::domain_error("projective canonical form needs a unit leading entry");
          return scale(a, ring_->inv(a.e[i]));
        }
      throw std::domain_error("zero matrix has no projective class");
  }
  return a;
}

std::uint64_t MatAlgebra::encode(const Mat& a) const
{
  std::uint64_t k = 0;
  const std::uint64_t N = ring_->size();
  for (unsigned i = n_ * n_; i-- > 0;)
    k = k * N + a.e[i];
  return k;
}

Mat MatAlgebra::decode(std::uint64_t key) const
{
  Mat m = zero();
  const std::uint64_t N = ring_->size();
  for (unsigned i = 0; i < n_ * n_; ++i) {
    m.e[i] = static_cast<Code>(key % N);
    key /= N;
  }
  return m;
}

Mat MatAlgebra::reduce(const RatMatrix& h) const
{
  if (h.dim() != n_)
    throw std::invalid_argument("dimension mismatch in reduction");
  Mat m = zero();
  for (unsigned i = 0; i < n_; ++i)
    for (unsigned j = 0; j < n_; ++j) {
      const RationalFunction& r = h.at(i, j);
      Code den = ring_->from_poly(r.den());
      if (!ring_->is_unit(den))
        throw std::domain_error("denominator " + r.den().to_string() + " is not invertible modulo " +
                                ring_->modulus().to_string());
      m(i, j) = ring_->mul(ring_->from_poly(r.num()), ring_->inv(den));
    }
  return m;
}

std::string MatAlgebra::to_string(const Mat& a) const
{
  std::ostringstream os;
  os << '[';
  for (unsigned i = 0; i < n_; ++i) {
    os << (i ? ",[" : "[");
    for (unsigned j = 0; j < n_; ++j)
      os << (j ? "," : "") << ring_->to_poly(a(i, j)).to_string();
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace ffexp
