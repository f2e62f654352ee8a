#include "ffexp/rational.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace ffexp {

RationalFunction::RationalFunction(Poly num) : num_(std::move(num)), den_(Poly::constant(num_.field(), 1)) {}

RationalFunction::RationalFunction(Poly num, Poly den)
{
  if (den.is_zero())
    throw std::domain_error("rational function with zero denominator");
  const FieldParams F = den.field();
  if (num.is_zero()) {
    num_ = Poly::zero(F);
    den_ = Poly::constant(F, 1);
    return;
  }
  Poly g = gcd(num, den);
  num = num / g;
  den = den / g;
  Residue c = F.inv(den.leading());
  num_ = num.scaled(c);
  den_ = den.scaled(c);
}

RationalFunction RationalFunction::constant(const FieldParams& field, std::int64_t c)
{
  return RationalFunction(Poly::constant(field, c));
}

RationalFunction RationalFunction::inverse() const
{
  if (is_zero())
    throw std::domain_error("inverse of zero rational function");
  return RationalFunction(den_, num_);
}

std::string RationalFunction::to_string() const
{
  if (den_.is_one())
    return num_.to_string();
  return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
}

RationalFunction operator+(const RationalFunction& a, const RationalFunction& b)
{
  if (a.den_ == b.den_)
    return RationalFunction(a.num_ + b.num_, a.den_);
  return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }

RationalFunction operator*(const RationalFunction& a, const RationalFunction& b)
{
  if (a.is_zero() || b.is_zero())
    return RationalFunction(Poly::zero(a.field()));
  if (a.den_.is_one() && b.den_.is_one())
    return RationalFunction(a.num_ * b.num_);
  return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
}

RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) { return a * b.inverse(); }

bool operator<(const RationalFunction& a, const RationalFunction& b)
{
  if (!(a.num_ == b.num_))
    return a.num_ < b.num_;
  return a.den_ < b.den_;
}

namespace {

class RationalParser {
 public:
  RationalParser(const FieldParams& field, const std::string& text) : field_(field)
  {
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c)))
        s_.push_back(c);
  }

  RationalFunction parse()
  {
    if (s_.empty())
      fail("empty expression");
    RationalFunction r = sum();
    if (pos_ != s_.size())
      fail("unexpected character");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const
  {
    throw std::invalid_argument("cannot parse '" + s_ + "': " + msg + " at " + std::to_string(pos_));
  }
  bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

  RationalFunction sum()
  {
    bool negate = false;
    if (peek('-') || peek('+'))
      negate = s_[pos_++] == '-';
    RationalFunction acc = product();
    if (negate)
      acc = -acc;
    while (peek('+') || peek('-')) {
      char op = s_[pos_++];
      RationalFunction rhs = product();
      acc = op == '+' ? acc + rhs : acc - rhs;
    }
    return acc;
  }

  RationalFunction product()
  {
    RationalFunction acc = power();
    while (peek('*') || peek('/')) {
      char op = s_[pos_++];
      RationalFunction rhs = power();
      acc = op == '*' ? acc * rhs : acc / rhs;
    }
    return acc;
  }

  RationalFunction power()
  {
    RationalFunction base = atom();
    if (!peek('^'))
      return base;
    ++pos_;
    bool negative = false;
    if (peek('-')) {
      negative = true;
      ++pos_;
    }
    std::uint64_t e = integer();
    RationalFunction r = RationalFunction::constant(field_, 1);
    for (std::uint64_t i = 0; i < e; ++i)
      r = r * base;
    return negative ? r.inverse() : r;
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

  RationalFunction atom()
  {
    if (peek('t')) {
      ++pos_;
      return RationalFunction(Poly::monomial(field_, 1));
    }
    if (peek('(')) {
      ++pos_;
      RationalFunction inner = sum();
      if (!peek(')'))
        fail("expected ')'");
      ++pos_;
      return inner;
    }
    return RationalFunction::constant(field_, static_cast<std::int64_t>(integer() % field_.p));
  }

  FieldParams field_;
  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

RationalFunction parse_rational(const FieldParams& field, const std::string& text)
{
  return RationalParser(field, text).parse();
}

// ---------------------------------------------------------------------------

RatMatrix::RatMatrix(unsigned n, std::vector<RationalFunction> entries) : n_(n), e_(std::move(entries))
{
  if (n == 0 || e_.size() != std::size_t{n} * n)
    throw std::invalid_argument("matrix entry count does not match dimension");
}

RatMatrix RatMatrix::identity(const FieldParams& field, unsigned n)
{
  std::vector<RationalFunction> e(std::size_t{n} * n, RationalFunction::constant(field, 0));
  for (unsigned i = 0; i < n; ++i)
    e[i * n + i] = RationalFunction::constant(field, 1);
  return RatMatrix(n, std::move(e));
}

RatMatrix operator*(const RatMatrix& a, const RatMatrix& b)
{
  if (a.n_ != b.n_)
    throw std::invalid_argument("matrix dimension mismatch");
  const unsigned n = a.n_;
  std::vector<RationalFunction> e;
  e.reserve(std::size_t{n} * n);
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j) {
      RationalFunction acc = RationalFunction::constant(a.field(), 0);
      for (unsigned k = 0; k < n; ++k)
        acc = acc + a.at(i, k) * b.at(k, j);
      e.push_back(std::move(acc));
    }
  return RatMatrix(n, std::move(e));
}

bool operator<(const RatMatrix& a, const RatMatrix& b)
{
  if (a.n_ != b.n_)
    return a.n_ < b.n_;
  return a.e_ < b.e_;
}

namespace {

RationalFunction minor_det(const std::vector<RationalFunction>& e, unsigned n, std::vector<unsigned>& rows,
                           std::vector<unsigned>& cols)
{
  if (rows.size() == 1)
    return e[rows[0] * n + cols[0]];
  RationalFunction acc = RationalFunction::constant(e.front().field(), 0);
  const unsigned r = rows.front();
  rows.erase(rows.begin());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const unsigned c = cols[k];
    if (e[r * n + c].is_zero())
      continue;
    std::vector<unsigned> sub(cols);
    sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(k));
    RationalFunction term = e[r * n + c] * minor_det(e, n, rows, sub);
    acc = (k % 2 == 0) ? acc + term : acc - term;
  }
  rows.insert(rows.begin(), r);
  return acc;
}

}  // namespace

RationalFunction RatMatrix::det() const
{
  std::vector<unsigned> rows(n_), cols(n_);
  for (unsigned i = 0; i < n_; ++i)
    rows[i] = cols[i] = i;
  return minor_det(e_, n_, rows, cols);
}

RatMatrix RatMatrix::inverse() const
{
  RationalFunction d = det();
  if (d.is_zero())
    throw std::domain_error("singular matrix");
  RationalFunction dinv = d.inverse();
  std::vector<RationalFunction> e(e_.size(), RationalFunction::constant(field(), 0));
  for (unsigned i = 0; i < n_; ++i)
    for (unsigned j = 0; j < n_; ++j) {
      RationalFunction cof;
      if (n_ == 1) {
        cof = RationalFunction::constant(field(), 1);
      } else {
        std::vector<unsigned> rows, cols;
        for (unsigned k = 0; k < n_; ++k) {
          if (k != j)
            rows.push_back(k);
          if (k != i)
            cols.push_back(k);
        }
        cof = minor_det(e_, n_, rows, cols);
      }
      if ((i + j) % 2 == 1)
        cof = -cof;
      e[i * n_ + j] = cof * dinv;
    }
  return RatMatrix(n_, std::move(e));
}

std::string RatMatrix::to_string() const
{
  std::ostringstream os;
  os << '[';
  for (unsigned i = 0; i < n_; ++i) {
    if (i)
      os << ',';
    os << '[';
    for (unsigned j = 0; j < n_; ++j) {
      if (j)
        os << ',';
      os << at(i, j).to_string();
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

namespace {

// Splits "a,b,(c,d)" at top-level commas.
std::vector<std::string> split_top(const std::string& s, char sep)
{
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '[')
      ++depth;
    if (c == ')' || c == ']')
      --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s)
{
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)))
      out.push_back(c);
  return out;
}

std::string unwrap(const std::string& s, const std::string& what)
{
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw std::invalid_argument("expected bracketed " + what + ": '" + s + "'");
  return s.substr(1, s.size() - 2);
}

}  // namespace

RatMatrix parse_matrix(const FieldParams& field, const std::string& text)
{
  const std::string body = unwrap(strip(text), "matrix");
  auto rows = split_top(body, ',');
  const unsigned n = static_cast<unsigned>(rows.size());
  std::vector<RationalFunction> e;
  for (const auto& row : rows) {
    auto cells = split_top(unwrap(row, "row"), ',');
    if (cells.size() != n)
      throw std::invalid_argument("matrix is not square: '" + text + "'");
    for (const auto& c : cells)
      e.push_back(parse_rational(field, c));
  }
  return RatMatrix(n, std::move(e));
}

std::vector<RatMatrix> parse_matrix_list(const FieldParams& field, const std::string& text)
{
  std::vector<RatMatrix> out;
  for (const auto& piece : split_top(text, ';'))
    if (!strip(piece).empty())
      out.push_back(parse_matrix(field, piece));
  return out;
}

}  // namespace ffexp
