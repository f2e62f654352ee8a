#include "ffexp/valuation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ffexp/modulus.hpp"

namespace ffexp {

Valuation Valuation::finite(Poly l)
{
  if (l.is_zero() || l.deg() == 0 || !l.is_monic() || !is_irreducible(l))
    throw std::invalid_argument("finite place needs a monic irreducible polynomial");
  Valuation v;
  v.field_ = l.field();
  v.prime_ = std::move(l);
  return v;
}

Valuation Valuation::infinity(const FieldParams& field)
{
  Valuation v;
  v.field_ = field;
  return v;
}

std::string Valuation::to_string() const { return prime_ ? "v_{" + prime_->to_string() + "}" : "v_inf"; }

ValuationValue poly_valuation(const Valuation& v, const Poly& g)
{
  if (g.is_zero())
    return std::nullopt;
  if (v.is_infinite())
    return -static_cast<std::int64_t>(g.deg());
  std::int64_t m = 0;
  Poly x = g;
  for (;;) {
    auto [q, r] = divmod(x, v.prime());
    if (!r.is_zero())
      break;
    x = std::move(q);
    ++m;
  }
  return m;
}

ValuationValue valuation_of(const Valuation& v, const RationalFunction& r)
{
  if (r.is_zero())
    return std::nullopt;
  return *poly_valuation(v, r.num()) - *poly_valuation(v, r.den());
}

double LogNorm::log(std::uint32_t p) const
{
  if (!p_exponent)
    return -std::numeric_limits<double>::infinity();
  return static_cast<double>(*p_exponent) * std::log(static_cast<double>(p));
}

bool operator<(const LogNorm& a, const LogNorm& b)
{
  if (!a.p_exponent)
    return b.p_exponent.has_value();
  if (!b.p_exponent)
    return false;
  return *a.p_exponent < *b.p_exponent;
}

LogNorm v_norm(const Valuation& v, const RationalFunction& r)
{
  auto val = valuation_of(v, r);
  if (!val)
    return {};
  return {-*val * static_cast<std::int64_t>(v.deg_v())};
}

std::vector<Valuation> height_places(const Poly& r0)
{
  std::vector<Valuation> out;
  if (r0.is_zero())
    throw std::invalid_argument("r0 must be nonzero");
  if (r0.deg() > 0) {
    Modulus m(r0.monic());
    for (const auto& l : m.factors())
      out.push_back(Valuation::finite(l));
  }
  out.push_back(Valuation::infinity(r0.field()));
  return out;
}

LogNorm matrix_height(const RatMatrix& h, const std::vector<Valuation>& places)
{
  LogNorm best;
  for (const auto& entry : h.entries()) {
    Poly rest = entry.den();
    for (const auto& v : places) {
      if (v.is_infinite())
        continue;
      for (;;) {
        auto [q, r] = divmod(rest, v.prime());
        if (!r.is_zero())
          break;
        rest = std::move(q);
      }
    }
    if (rest.deg() > 0)
      throw std::invalid_argument("denominator " + entry.den().to_string() + " is not supported on the given places");
    for (const auto& v : places) {
      LogNorm n = v_norm(v, entry);
      if (best < n)
        best = n;
    }
  }
  return best;
}

}  // namespace ffexp
