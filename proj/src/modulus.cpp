#include "ffexp/modulus.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ffexp {

namespace {

std::uint64_t ipow(std::uint64_t b, unsigned e)
{
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i)
    r *= b;
  return r;
}

}  // namespace

Modulus::Modulus(Poly f) : f_(std::move(f))
{
  if (f_.is_zero() || f_.deg() == 0)
    throw std::invalid_argument("modulus must have positive degree");
  if (!f_.is_monic())
    throw std::invalid_argument("modulus must be monic");
  factors_ = factor_squarefree_poly(f_);
}

std::uint64_t Modulus::residue_size(std::size_t i) const { return ipow(field().p, factors_.at(i).deg()); }

std::uint64_t Modulus::norm() const { return ipow(field().p, f_.deg()); }

Modulus factor_squarefree(const Poly& f) { return Modulus(f); }

void to_json(nlohmann::json& j, const Modulus& m)
{
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& l : m.factors())
    factors.push_back({{"poly", l}, {"degree", l.deg()}});
  j = {{"f", m.poly()}, {"text", m.poly().to_string()}, {"degree", m.degree()}, {"factors", factors}};
}

AdmissibilityVerdict is_admissible(const Modulus& f, const AdmissibleSpec& spec)
{
  if (spec.r0.is_zero())
    throw std::invalid_argument("r0 must be nonzero");
  std::set<unsigned> seen;
  for (const auto& l : f.factors()) {
    if ((spec.r0 % l).is_zero())
      return {false, 1, "factor " + l.to_string() + " divides r0"};
    const unsigned d = l.deg();
    if (d <= 1)
      return {false, 2, "factor " + l.to_string() + " has degree 1"};
    if (!seen.insert(d).second)
      return {false, 3, "two factors of degree " + std::to_string(d)};
    for (auto r : prime_divisors(d))
      if (r < spec.c0)
        return {false, 4, "degree " + std::to_string(d) + " has prime divisor " + std::to_string(r) + " < c0"};
  }
  return {};
}

std::vector<Modulus> enumerate_admissible(const AdmissibleSpec& spec)
{
  if (spec.r0.is_zero())
    throw std::invalid_argument("r0 must be nonzero");
  const FieldParams& F = spec.r0.field();

  // Candidate irreducibles per allowed degree.
  std::vector<std::pair<unsigned, std::vector<Poly>>> by_degree;
  for (unsigned d = 2; d <= spec.max_total_degree; ++d) {
    auto primes = prime_divisors(d);
    if (std::any_of(primes.begin(), primes.end(), [&](auto r) { return r < spec.c0; }))
      continue;
    std::vector<Poly> ok;
    for (auto& l : monic_irreducibles(F, d))
      if (!(spec.r0 % l).is_zero())
        ok.push_back(std::move(l));
    if (!ok.empty())
      by_degree.emplace_back(d, std::move(ok));
  }

  std::vector<Poly> products;
  // Pick at most one irreducible from each degree class, total degree bounded.
  std::function<void(std::size_t, unsigned, const Poly&, bool)> rec = [&](std::size_t idx, unsigned total,
                                                                          const Poly& acc, bool nonempty) {
    if (idx == by_degree.size()) {
      if (nonempty)
        products.push_back(acc);
      return;
    }
    rec(idx + 1, total, acc, nonempty);
    const auto& [d, polys] = by_degree[idx];
    if (total + d > spec.max_total_degree)
      return;
    for (const auto& l : polys)
      rec(idx + 1, total + d, acc * l, true);
  };
  rec(0, 0, Poly::constant(F, 1), false);

  std::sort(products.begin(), products.end());
  std::vector<Modulus> out;
  out.reserve(products.size());
  for (auto& f : products)
    out.emplace_back(std::move(f));
  return out;
}

Crt::Crt(const Modulus& m) : m_(m)
{
  const Poly& f = m_.poly();
  for (const auto& l : m_.factors()) {
    Poly cofactor = f / l;
    Poly inv = invmod(cofactor % l, l);
    idempotents_.push_back((cofactor * inv) % f);
  }
}

std::vector<Poly> Crt::split(const Poly& x) const
{
  if (!x.is_zero() && x.deg() >= m_.degree())
    throw std::invalid_argument("residue " + x.to_string() + " is not reduced modulo " + m_.poly().to_string());
  std::vector<Poly> parts;
  parts.reserve(m_.factors().size());
  for (const auto& l : m_.factors())
    parts.push_back(x % l);
  return parts;
}

Poly Crt::combine(const std::vector<Poly>& parts) const
{
  if (parts.size() != idempotents_.size())
    throw std::invalid_argument("wrong number of CRT components");
  Poly acc = Poly::zero(m_.field());
  for (std::size_t i = 0; i < parts.size(); ++i)
    acc = acc + parts[i] * idempotents_[i];
  return acc % m_.poly();
}

}  // namespace ffexp
