#include "ffexp/classify.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "ffexp/ring.hpp"

namespace ffexp {

std::uint32_t ProjectiveLine::act(Code a, Code b, Code c, Code d, std::uint32_t z) const
{
  const QuotientRing& F = *f_;
  if (z == infinity())
    return c == 0 ? infinity() : F.mul(a, F.inv(c));
  Code den = F.add(F.mul(c, z), d);
  if (den == 0)
    return infinity();
  return F.mul(F.add(F.mul(a, z), b), F.inv(den));
}

namespace {

std::uint64_t ipow(std::uint64_t b, unsigned e)
{
  std::uint64_t r = 1;
  while (e--)
    r *= b;
  return r;
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x)
  {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b)
  {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Sl2Classifier::Sl2Classifier(std::shared_ptr<const GroupEnum> parent) : g_(std::move(parent))
{
  const QuotientRing& R = g_->ring();
  if (g_->algebra().dim() != 2 || !R.is_field())
    throw std::invalid_argument("classification is implemented for 2x2 matrices over a field");
  big_ = std::make_shared<const QuotientRing>(first_irreducible(R.field(), 2 * R.degree()));
  embed_ = std::make_unique<FieldEmbedding>(R, *big_);
  line_ = std::make_unique<ProjectiveLine>(*big_);
  for (Code x = 1; x < R.size(); ++x)
    if (!R.is_square(x)) {
      eps_ = x;
      break;
    }
  center_order_ = 0;
  for (Id i = 0; i < g_->order(); ++i)
    center_order_ += is_scalar(g_->element(i));
}

std::vector<std::uint64_t> Sl2Classifier::proper_subfields() const
{
  std::vector<std::uint64_t> out;
  const unsigned d = g_->ring().degree();
  for (unsigned e = 1; e < d; ++e)
    if (d % e == 0)
      out.push_back(ipow(g_->ring().p(), e));
  return out;
}

bool Sl2Classifier::is_scalar(const Mat& m) const { return m(0, 1) == 0 && m(1, 0) == 0 && m(0, 0) == m(1, 1); }

bool Sl2Classifier::in_split_normalizer(const Mat& m) const
{
  return (m(0, 1) == 0 && m(1, 0) == 0) || (m(0, 0) == 0 && m(1, 1) == 0);
}

bool Sl2Classifier::in_nonsplit_normalizer(const Mat& m) const
{
  const QuotientRing& R = g_->ring();
  if (m(0, 0) == m(1, 1) && m(0, 1) == R.mul(eps_, m(1, 0)))
    return true;
  return m(0, 0) == R.neg(m(1, 1)) && m(0, 1) == R.neg(R.mul(eps_, m(1, 0)));
}

Mat Sl2Classifier::normalized(const Mat& m) const { return g_->algebra().canonical(m, Quotient::Projective); }

bool Sl2Classifier::entries_in_subfield(const Mat& m, std::uint64_t q_sub) const
{
  Mat n = normalized(m);
  for (unsigned i = 0; i < 4; ++i)
    if (!g_->ring().in_subfield(n.e[i], q_sub))
      return false;
  return true;
}

Conjugator Sl2Classifier::from_matrix(const Mat& g) const { return {g, g_->algebra().inverse(g)}; }

Mat Sl2Classifier::conjugate(const Conjugator& c, const Mat& m) const
{
  const MatAlgebra& A = g_->algebra();
  return A.mul(A.mul(c.g, m), c.g_inv);
}

std::vector<SubgroupDesc> Sl2Classifier::structural_menu() const
{
  std::vector<Id> borel, split, nonsplit, z;
  for (Id i = 0; i < g_->order(); ++i) {
    Mat m = g_->element(i);
    if (in_borel(m))
      borel.push_back(i);
    if (in_split_normalizer(m))
      split.push_back(i);
    if (in_nonsplit_normalizer(m))
      nonsplit.push_back(i);
    if (is_scalar(m))
      z.push_back(i);
  }
  std::vector<SubgroupDesc> menu;
  auto push = [&](std::vector<Id> members, SubgroupTag tag) {
    SubgroupDesc h = subgroup_from_members(*g_, std::move(members));
    h.tag = tag;
    menu.push_back(std::move(h));
  };
  push(borel, SubgroupTag::structural_of(StructuralKind::Borel));
  push(split, SubgroupTag::structural_of(StructuralKind::TorusNormalizerSplit));
  push(nonsplit, SubgroupTag::structural_of(StructuralKind::TorusNormalizerNonsplit));
  push(z, SubgroupTag::central());
  return menu;
}

SubgroupDesc Sl2Classifier::subfield_subgroup(std::uint64_t q_sub) const
{
  const std::uint64_t Q = field_size();
  auto subs = proper_subfields();
  if (q_sub != Q && std::find(subs.begin(), subs.end(), q_sub) == subs.end())
    throw std::invalid_argument("F_" + std::to_string(q_sub) + " is not a subfield of F_" + std::to_string(Q));
  std::vector<Id> members;
  const bool linear = g_->quotient() == Quotient::Linear;
  for (Id i = 0; i < g_->order(); ++i) {
    Mat m = g_->element(i);
    bool ok = true;
    if (linear) {
      for (unsigned k = 0; k < 4 && ok; ++k)
        ok = g_->ring().in_subfield(m.e[k], q_sub);
    } else {
      ok = entries_in_subfield(m, q_sub);
    }
    if (ok)
      members.push_back(i);
  }
  SubgroupDesc h = subgroup_from_members(*g_, std::move(members));
  h.tag = q_sub == Q ? SubgroupTag::full() : SubgroupTag::subfield(q_sub);
  return h;
}

SubgroupDesc subfield_subgroup(const Sl2Classifier& c, std::uint64_t q_sub) { return c.subfield_subgroup(q_sub); }

std::vector<std::vector<std::uint32_t>> Sl2Classifier::orbits(const std::vector<Id>& gens) const
{
  const std::uint32_t n = line_->size();
  UnionFind uf(n);
  for (Id s : gens) {
    Mat m = g_->element(s);
    Code a = (*embed_)(m(0, 0)), b = (*embed_)(m(0, 1)), c = (*embed_)(m(1, 0)), d = (*embed_)(m(1, 1));
    for (std::uint32_t z = 0; z < n; ++z)
      uf.unite(z, line_->act(a, b, c, d, z));
  }
  std::vector<std::vector<std::uint32_t>> by_root(n);
  for (std::uint32_t z = 0; z < n; ++z)
    by_root[uf.find(z)].push_back(z);
  std::vector<std::vector<std::uint32_t>> out;
  for (auto& o : by_root)
    if (!o.empty())
      out.push_back(std::move(o));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return out;
}

Mat Sl2Classifier::cross_ratio_map(std::uint32_t x, std::uint32_t y, std::uint32_t z) const
{
  const QuotientRing& R = g_->ring();
  const std::uint32_t inf = R.size();
  Mat g = g_->algebra().zero();
  if (x == inf) {
    g(0, 0) = 1;
    g(0, 1) = R.neg(y);
    g(1, 1) = R.sub(z, y);
  } else if (y == inf) {
    g(0, 1) = R.sub(z, x);
    g(1, 0) = 1;
    g(1, 1) = R.neg(x);
  } else if (z == inf) {
    g(0, 0) = 1;
    g(0, 1) = R.neg(y);
    g(1, 0) = 1;
    g(1, 1) = R.neg(x);
  } else {
    Code zx = R.sub(z, x), zy = R.sub(z, y);
    g(0, 0) = zx;
    g(0, 1) = R.neg(R.mul(y, zx));
    g(1, 0) = zy;
    g(1, 1) = R.neg(R.mul(x, zy));
  }
  return g;
}

bool Sl2Classifier::all_conjugates(const SubgroupDesc& h, const Conjugator& c,
                                   bool (Sl2Classifier::*pred)(const Mat&) const) const
{
  for (Id s : h.generators)
    if (!(this->*pred)(conjugate(c, g_->element(s))))
      return false;
  return true;
}

std::optional<Conjugator> Sl2Classifier::subfield_conjugator(const SubgroupDesc& h, std::uint64_t q_sub,
                                                             const std::vector<std::vector<std::uint32_t>>& orbs) const
{
  const QuotientRing& R = g_->ring();
  const std::uint32_t big_inf = line_->infinity();
  const std::uint64_t psl_order = q_sub * (q_sub * q_sub - 1) / 2;
  for (const auto& o : orbs) {
    if (o.size() != q_sub + 1)
      continue;
    std::vector<std::uint32_t> pts;
    for (std::uint32_t z : o) {
      if (z == big_inf) {
        pts.push_back(R.size());
        continue;
      }
      auto pre = embed_->preimage(z);
      if (!pre)
        break;
      pts.push_back(*pre);
    }
    if (pts.size() != o.size())
      continue;
    Conjugator c = from_matrix(cross_ratio_map(pts[0], pts[1], pts[2]));
    bool inside = true;
    for (Id s : h.generators)
      if (!entries_in_subfield(conjugate(c, g_->element(s)), q_sub)) {
        inside = false;
        break;
      }
    if (!inside)
      continue;
    // Count projective classes with square determinant: equals |PSL_2(q')|
    // exactly when the image contains PSL_2(q').
    std::unordered_set<std::uint64_t> classes;
    for (Id m : h.members) {
      Mat n = normalized(conjugate(c, g_->element(m)));
      Code d = g_->algebra().det(n);
      if (R.pow(d, (q_sub - 1) / 2) == 1)
        classes.insert(g_->algebra().encode(n));
    }
    if (classes.size() == psl_order)
      return c;
  }
  return std::nullopt;
}

std::optional<Conjugator> Sl2Classifier::structural_conjugator(const SubgroupDesc& h, StructuralKind kind,
                                                               const std::vector<std::vector<std::uint32_t>>& orbs) const
{
  const QuotientRing& R = g_->ring();
  const QuotientRing& B = *big_;
  const std::uint32_t big_inf = line_->infinity();
  auto rational = [&](std::uint32_t z) -> std::optional<std::uint32_t> {
    if (z == big_inf)
      return R.size();
    auto pre = embed_->preimage(z);
    if (!pre)
      return std::nullopt;
    return *pre;
  };
  for (const auto& o : orbs) {
    if (o.size() > 2)
      break;
    if (kind == StructuralKind::Borel && o.size() == 1) {
      auto x = rational(o[0]);
      if (!x)
        continue;
      Mat g = g_->algebra().identity();
      if (*x != R.size()) {
        g = g_->algebra().zero();
        g(0, 1) = 1;
        g(1, 0) = 1;
        g(1, 1) = R.neg(*x);
      }
      Conjugator c = from_matrix(g);
      if (all_conjugates(h, c, &Sl2Classifier::in_borel))
        return c;
    }
    if (kind == StructuralKind::TorusNormalizerSplit && o.size() == 2) {
      auto x = rational(o[0]), y = rational(o[1]);
      if (!x || !y)
        continue;
      Mat g = g_->algebra().zero();
      if (*x == R.size()) {
        g(0, 0) = 1;
        g(0, 1) = R.neg(*y);
        g(1, 1) = 1;
      } else if (*y == R.size()) {
        g(0, 1) = 1;
        g(1, 0) = 1;
        g(1, 1) = R.neg(*x);
      } else {
        g(0, 0) = 1;
        g(0, 1) = R.neg(*y);
        g(1, 0) = 1;
        g(1, 1) = R.neg(*x);
      }
      Conjugator c = from_matrix(g);
      if (all_conjugates(h, c, &Sl2Classifier::in_split_normalizer))
        return c;
    }
    if (kind == StructuralKind::TorusNormalizerNonsplit) {
      const std::uint32_t z = o[0];
      if (rational(z))
        continue;
      Code zq = B.pow(z, R.size());
      auto s = embed_->preimage(B.add(z, zq));
      auto n = embed_->preimage(B.mul(z, zq));
      if (!s || !n)
        continue;
      Code half = R.inv(R.from_int(2));
      Code s2 = R.mul(*s, half);
      Code disc = R.sub(R.mul(s2, s2), *n);
      if (disc == 0 || R.is_square(disc))
        continue;
      Code a = R.sqrt(R.mul(eps_, R.inv(disc)));
      Mat g = g_->algebra().zero();
      g(0, 0) = a;
      g(0, 1) = R.neg(R.mul(a, s2));
      g(1, 1) = 1;
      Conjugator c = from_matrix(g);
      if (all_conjugates(h, c, &Sl2Classifier::in_nonsplit_normalizer))
        return c;
    }
  }
  return std::nullopt;
}

Classification Sl2Classifier::classify(const SubgroupDesc& h_in) const
{
  SubgroupDesc h = h_in;
  if (h.generators.empty() && h.members.size() > 1)
    h.generators = generating_set(*g_, h.members);
  if (h.members.size() == g_->order())
    return {SubgroupTag::full(), std::nullopt};
  std::size_t scalars = 0;
  for (Id m : h.members)
    scalars += is_scalar(g_->element(m));
  if (scalars == h.members.size())
    return {SubgroupTag::central(), std::nullopt};

  auto orbs = orbits(h.generators);
  const std::size_t image_order = h.members.size() / scalars;
  auto candidates = proper_subfields();
  // In PGL_2(F_Q) the proper subgroups containing PSL_2(F_Q) are tagged Subfield(Q).
  if (g_->quotient() == Quotient::Projective)
    candidates.push_back(field_size());
  for (std::uint64_t q : candidates) {
    const std::uint64_t psl = q * (q * q - 1) / 2;
    if (image_order < psl || (2 * psl) % image_order != 0)
      continue;
    if (auto c = subfield_conjugator(h, q, orbs))
      return {SubgroupTag::subfield(q), c};
  }
  for (StructuralKind k :
       {StructuralKind::Borel, StructuralKind::TorusNormalizerSplit, StructuralKind::TorusNormalizerNonsplit})
    if (auto c = structural_conjugator(h, k, orbs))
      return {SubgroupTag::structural_of(k), c};
  if ((image_order == 12 || image_order == 24 || image_order == 60) && !is_abelian(*g_, h.members))
    return {SubgroupTag::structural_of(StructuralKind::Exceptional), std::nullopt};
  return {SubgroupTag{}, std::nullopt};
}

bool Sl2Classifier::sandwich_holds(const SubgroupDesc& h, const Conjugator& c, std::uint64_t q_sub) const
{
  const QuotientRing& R = g_->ring();
  const MatAlgebra& A = g_->algebra();
  // Subfield elements and a primitive element of F_q'.
  std::vector<Code> sub;
  for (Code x = 0; x < R.size(); ++x)
    if (R.in_subfield(x, q_sub))
      sub.push_back(x);
  if (sub.size() != q_sub)
    throw std::logic_error("subfield size mismatch");
  Code beta = 0;
  for (Code x : sub) {
    if (x == 0)
      continue;
    std::uint64_t k = 1;
    for (Code y = x; y != 1; y = R.mul(y, x))
      ++k;
    if (k == q_sub - 1) {
      beta = x;
      break;
    }
  }
  std::vector<Mat> gens;
  Code x = 1;
  for (std::uint64_t span = 1; span < q_sub; span *= R.p()) {
    Mat u = A.identity(), l = A.identity();
    u(0, 1) = x;
    l(1, 0) = x;
    gens.push_back(u);
    gens.push_back(l);
    x = R.mul(x, beta);
  }
  Mat d = A.identity();
  d(0, 0) = beta;
  gens.push_back(d);
  GroupEnum pgl = GroupEnum::generate(g_->algebra_ptr(), gens, Quotient::Projective);
  if (pgl.order() != q_sub * (q_sub * q_sub - 1))
    return false;
  std::vector<Id> all(pgl.order());
  std::iota(all.begin(), all.end(), 0u);
  std::vector<Id> derived = derived_subgroup(pgl, all);

  std::unordered_set<Id> image;
  for (Id m : h.members) {
    auto id = pgl.find(conjugate(c, g_->element(m)));
    if (!id)
      return false;
    image.insert(*id);
  }
  for (Id k : derived)
    if (!image.count(k))
      return false;
  return true;
}

}  // namespace ffexp
