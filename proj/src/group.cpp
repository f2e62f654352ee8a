#include "ffexp/group.hpp"

#include <deque>
#include <sstream>

#include "ffexp/hash.hpp"
#include "ffexp/modulus.hpp"

namespace ffexp {

std::vector<Id> FiniteGroup::left_mul_table(Id s) const
{
  std::vector<Id> out(order());
  for (Id x = 0; x < out.size(); ++x)
    out[x] = mul(s, x);
  return out;
}

std::vector<Id> FiniteGroup::right_mul_table(Id s) const
{
  std::vector<Id> out(order());
  for (Id x = 0; x < out.size(); ++x)
    out[x] = mul(x, s);
  return out;
}

Id FiniteGroup::pow(Id a, std::uint64_t e) const
{
  Id r = identity();
  while (e) {
    if (e & 1)
      r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

Id FiniteGroup::element_order(Id a) const
{
  Id k = 1;
  for (Id x = a; x != identity(); x = mul(x, a))
    ++k;
  return k;
}

// ---------------------------------------------------------------------------

TabulatedGroup TabulatedGroup::from(const FiniteGroup& g)
{
  if (g.order() > 20000)
    throw BudgetExceeded("group too large to tabulate", g.order());
  TabulatedGroup t;
  t.n_ = static_cast<std::uint32_t>(g.order());
  t.table_.resize(std::size_t{t.n_} * t.n_);
  for (Id a = 0; a < t.n_; ++a)
    for (Id b = 0; b < t.n_; ++b)
      t.table_[std::size_t{a} * t.n_ + b] = g.mul(a, b);
  t.describe_ = "tabulated " + g.describe();
  t.hash_ = g.hash();
  t.finish();
  return t;
}

TabulatedGroup TabulatedGroup::cyclic(std::uint32_t n)
{
  if (n == 0)
    throw std::invalid_argument("cyclic group of order 0");
  TabulatedGroup t;
  t.n_ = n;
  t.table_.resize(std::size_t{n} * n);
  for (Id a = 0; a < n; ++a)
    for (Id b = 0; b < n; ++b)
      t.table_[std::size_t{a} * n + b] = (a + b) % n;
  t.describe_ = "Z/" + std::to_string(n);
  t.hash_ = Fnv1a().add("cyclic").add(n).hex();
  t.finish();
  return t;
}

void TabulatedGroup::finish()
{
  inv_.assign(n_, 0);
  for (Id a = 0; a < n_; ++a)
    for (Id b = 0; b < n_; ++b)
      if (table_[std::size_t{a} * n_ + b] == 0) {
        inv_[a] = b;
        break;
      }
}

// ---------------------------------------------------------------------------

ProductGroup::ProductGroup(std::vector<std::shared_ptr<const FiniteGroup>> factors) : factors_(std::move(factors))
{
  if (factors_.empty())
    throw std::invalid_argument("product of no groups");
  for (const auto& f : factors_) {
    stride_.push_back(order_);
    order_ *= f->order();
    if (order_ > 0xffffffffull)
      throw BudgetExceeded("product group order exceeds id range", order_);
  }
}

Id ProductGroup::encode(const std::vector<Id>& parts) const
{
  std::size_t a = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    a += parts[i] * stride_[i];
  return static_cast<Id>(a);
}

std::vector<Id> ProductGroup::decode(Id a) const
{
  std::vector<Id> parts(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    parts[i] = static_cast<Id>(a % factors_[i]->order());
    a = static_cast<Id>(a / factors_[i]->order());
  }
  return parts;
}

Id ProductGroup::mul(Id a, Id b) const
{
  std::size_t r = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const std::size_t n = factors_[i]->order();
    r += factors_[i]->mul(static_cast<Id>(a % n), static_cast<Id>(b % n)) * stride_[i];
    a = static_cast<Id>(a / n);
    b = static_cast<Id>(b / n);
  }
  return static_cast<Id>(r);
}

Id ProductGroup::inv(Id a) const
{
  std::size_t r = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const std::size_t n = factors_[i]->order();
    r += factors_[i]->inv(static_cast<Id>(a % n)) * stride_[i];
    a = static_cast<Id>(a / n);
  }
  return static_cast<Id>(r);
}

std::string ProductGroup::hash() const
{
  Fnv1a h;
  h.add("product");
  for (const auto& f : factors_)
    h.add(f->hash());
  return h.hex();
}

std::string ProductGroup::describe() const
{
  std::string s;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    s += (i ? " x " : "") + factors_[i]->describe();
  return s;
}

// ---------------------------------------------------------------------------

GroupEnum GroupEnum::generate(std::shared_ptr<const MatAlgebra> algebra, const std::vector<Mat>& gens, Quotient q,
                              std::size_t cap)
{
  GroupEnum g;
  g.alg_ = std::move(algebra);
  g.q_ = q;
  const MatAlgebra& A = *g.alg_;
  for (const auto& s : gens) {
    if (!A.is_invertible(s))
      throw std::invalid_argument("generator " + A.to_string(s) + " is not invertible");
    g.gens_.push_back(A.canonical(s, q));
  }
  Mat e = A.canonical(A.identity(), q);
  g.keys_.push_back(A.encode(e));
  g.ids_.emplace(g.keys_[0], 0);
  for (std::size_t head = 0; head < g.keys_.size(); ++head) {
    Mat x = A.decode(g.keys_[head]);
    for (const auto& s : g.gens_) {
      std::uint64_t k = A.encode(A.canonical(A.mul(x, s), q));
      if (g.ids_.emplace(k, static_cast<Id>(g.keys_.size())).second) {
        g.keys_.push_back(k);
        if (g.keys_.size() > cap)
          throw BudgetExceeded("group enumeration exceeded " + std::to_string(cap) + " elements", g.keys_.size());
      }
    }
  }
  g.index();
  return g;
}

GroupEnum GroupEnum::from_keys(std::shared_ptr<const MatAlgebra> algebra, std::vector<std::uint64_t> keys,
                               std::vector<Mat> gens, Quotient q)
{
  GroupEnum g;
  g.alg_ = std::move(algebra);
  g.q_ = q;
  g.gens_ = std::move(gens);
  g.keys_ = std::move(keys);
  if (g.keys_.empty() || g.keys_[0] != g.alg_->encode(g.alg_->canonical(g.alg_->identity(), q)))
    throw std::invalid_argument("stored enumeration does not start with the identity");
  for (Id i = 0; i < g.keys_.size(); ++i)
    if (!g.ids_.emplace(g.keys_[i], i).second)
      throw std::invalid_argument("stored enumeration has duplicate elements");
  g.index();
  return g;
}

void GroupEnum::index()
{
  const MatAlgebra& A = *alg_;
  inv_.resize(keys_.size());
  for (Id i = 0; i < keys_.size(); ++i)
    inv_[i] = id_of(A.inverse(A.decode(keys_[i])));
  Fnv1a h;
  h.add("groupenum").add(std::uint64_t{A.ring().p()}).add(A.ring().modulus().to_string());
  h.add(std::uint64_t{A.dim()}).add(to_string(q_));
  for (const auto& s : gens_)
    h.add(A.encode(s));
  hash_ = h.hex();
}

Id GroupEnum::mul(Id a, Id b) const
{
  const MatAlgebra& A = *alg_;
  return id_of(A.mul(A.decode(keys_[a]), A.decode(keys_[b])));
}

std::optional<Id> GroupEnum::find(const Mat& m) const
{
  if (!alg_->is_invertible(m))
    return std::nullopt;
  auto it = ids_.find(alg_->encode(alg_->canonical(m, q_)));
  if (it == ids_.end())
    return std::nullopt;
  return it->second;
}

Id GroupEnum::id_of(const Mat& m) const
{
  auto it = ids_.find(alg_->encode(alg_->canonical(m, q_)));
  if (it == ids_.end())
    throw std::invalid_argument("matrix " + alg_->to_string(m) + " is not in the group");
  return it->second;
}

std::vector<Id> GroupEnum::generator_ids() const
{
  std::vector<Id> out;
  for (const auto& s : gens_)
    out.push_back(id_of(s));
  return out;
}

std::string GroupEnum::describe() const
{
  std::ostringstream os;
  os << "<" << gens_.size() << " generators> in M_" << alg_->dim() << "(F_" << alg_->ring().p() << "[t]/("
     << alg_->ring().modulus().to_string() << ")) " << to_string(q_) << ", order " << keys_.size();
  return os.str();
}

std::uint64_t sl2_order(const Modulus& f)
{
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < f.factors().size(); ++i) {
    std::uint64_t N = f.residue_size(i);
    r *= N * (N * N - 1);
  }
  return r;
}

}  // namespace ffexp
