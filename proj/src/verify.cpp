#include "ffexp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ffexp/classify.hpp"
#include "ffexp/ring.hpp"
#include "ffexp/sl2.hpp"
#include "ffexp/valuation.hpp"

namespace ffexp {

namespace {

void require_prime_above_five(std::uint32_t q)
{
  if (!is_prime(q) || q <= 5)
    throw std::invalid_argument("q must be a prime larger than 5");
}

std::string point_name(const QuotientRing& F, std::uint32_t z)
{
  return z == F.size() ? "inf" : F.to_poly(z).to_string();
}

}  // namespace

TransporterReport transporter_check(std::uint32_t q, unsigned n)
{
  require_prime_above_five(q);
  if (n == 0)
    throw std::invalid_argument("extension degree must be positive");
  const FieldParams F(q);
  QuotientRing small(first_irreducible(F, n));
  const std::uint64_t Q = small.size();
  const std::uint64_t expected = Q * (Q * Q + 1);
  if (Q * Q + 1 >= (1u << 21) || expected > 5'000'000)
    throw BudgetExceeded("subline sweep too large", expected);
  QuotientRing big(first_irreducible(F, 2 * n));
  FieldEmbedding emb(small, big);
  ProjectiveLine line(big);
  const std::uint32_t inf = line.infinity();
  const std::size_t width = Q + 1;

  std::vector<std::uint32_t> pts;
  for (Code x = 0; x < Q; ++x)
    pts.push_back(emb(x));
  pts.push_back(inf);
  std::sort(pts.begin(), pts.end());

  auto key_of = [](const std::uint32_t* s) {
    return std::uint64_t{s[0]} | std::uint64_t{s[1]} << 21 | std::uint64_t{s[2]} << 42;
  };
  std::unordered_map<std::uint64_t, std::size_t> seen;
  seen.reserve(expected * 2);
  seen.emplace(key_of(pts.data()), 0);

  const Code prim = big.primitive_element();
  const std::array<std::array<Code, 4>, 3> moves{{{prim, 0, 0, 1}, {1, 1, 0, 1}, {0, 1, 1, 0}}};
  std::vector<std::uint32_t> img(width);
  for (std::size_t head = 0; head * width < pts.size(); ++head)
    for (const auto& m : moves) {
      for (std::size_t i = 0; i < width; ++i)
        img[i] = line.act(m[0], m[1], m[2], m[3], pts[head * width + i]);
      std::sort(img.begin(), img.end());
      if (seen.emplace(key_of(img.data()), seen.size()).second)
        pts.insert(pts.end(), img.begin(), img.end());
    }

  TransporterReport r;
  r.q = q;
  r.n = n;
  r.cosets = pts.size() / width;
  if (r.cosets != expected)
    throw std::logic_error("unexpected number of sublines");

  const std::array<std::array<Code, 4>, 2> psl_gens{{{1, 1, 0, 1}, {1, 0, 1, 1}}};
  for (std::size_t s = 0; s < r.cosets; ++s) {
    const std::uint32_t* b = pts.data() + s * width;
    bool stable = true;
    for (const auto& m : psl_gens)
      for (std::size_t i = 0; i < width && stable; ++i)
        stable = std::binary_search(b, b + width, line.act(m[0], m[1], m[2], m[3], b[i]));
    if (!stable)
      continue;
    ++r.transporting;
    if (s != 0 && !r.witness)
      r.witness = "subline through " + point_name(big, b[0]) + ", " + point_name(big, b[1]) + ", " +
                  point_name(big, b[2]);
  }

  auto alg = matrix_algebra(small.modulus());
  GroupEnum ambient = classical_group(alg, Quotient::Projective);
  std::vector<Mat> gens{alg->from_ints({1, 1, 0, 1}), alg->from_ints({1, 0, 1, 1})};
  for (Id g = 0; g < ambient.order(); ++g) {
    Mat x = ambient.element(g), xi = alg->inverse(x);
    bool ok = true;
    for (const Mat& s : gens)
      ok = ok && ambient.find(alg->mul(alg->mul(xi, s), x)).has_value();
    r.ambient_checked += ok;
  }
  r.holds = r.transporting == 1 && !r.witness && r.ambient_checked == ambient.order();
  return r;
}

IntersectionReport conjugate_intersection_check(std::uint32_t q, unsigned m, unsigned n)
{
  require_prime_above_five(q);
  if (m == 0 || n % m != 0 || m == n)
    throw std::invalid_argument("need m | n and m < n");
  const FieldParams F(q);
  auto alg_m = matrix_algebra(first_irreducible(F, m));
  auto alg_n = matrix_algebra(first_irreducible(F, n));
  const QuotientRing& Rm = alg_m->ring();
  const QuotientRing& Rn = alg_n->ring();
  FieldEmbedding emb(Rm, Rn);
  auto P = std::make_shared<const GroupEnum>(classical_group(alg_m, Quotient::Projective));
  GroupEnum G = classical_group(alg_n, Quotient::Projective);
  Sl2Classifier classifier(P);

  std::vector<char> in_sub(Rn.size());
  for (Code a = 0; a < Rn.size(); ++a)
    in_sub[a] = Rn.in_subfield(a, Rm.size());
  auto rational = [&](const Mat& x) {
    Mat c = alg_n->canonical(x, Quotient::Projective);
    return in_sub[c.e[0]] && in_sub[c.e[1]] && in_sub[c.e[2]] && in_sub[c.e[3]];
  };
  std::vector<Mat> lifted(P->order());
  for (Id x = 0; x < P->order(); ++x) {
    Mat a = P->element(x);
    Mat b = alg_n->zero();
    for (unsigned i = 0; i < 4; ++i)
      b.e[i] = emb(a.e[i]);
    lifted[x] = b;
  }

  IntersectionReport r;
  const std::size_t words = (P->order() + 63) / 64;
  std::unordered_map<std::string, std::string> cache;
  std::string bits(words * 8, '\0');
  for (Id g = 0; g < G.order(); ++g) {
    Mat x = G.element(g);
    if (rational(x))
      continue;
    Mat xi = alg_n->inverse(x);
    std::fill(bits.begin(), bits.end(), '\0');
    std::vector<Id> members;
    for (Id h = 0; h < P->order(); ++h)
      if (rational(alg_n->mul(alg_n->mul(xi, lifted[h]), x))) {
        members.push_back(h);
        bits[h / 8] |= static_cast<char>(1 << (h % 8));
      }
    ++r.checked;
    if (P->order() % members.size() != 0)
      r.lagrange = false;
    auto it = cache.find(bits);
    if (it == cache.end()) {
      SubgroupDesc s = subgroup_from_members(*P, members);
      SubgroupTag tag = classifier.classify(s).tag;
      it = cache.emplace(bits, tag.to_string()).first;
      bool ok = tag.kind == SubgroupTag::Kind::Central || tag.kind == SubgroupTag::Kind::Structural;
      if (!ok)
        r.counterexamples.push_back("g = " + alg_n->to_string(x) + ": " + tag.to_string());
    }
    ++r.tags[it->second];
  }
  r.distinct = cache.size();
  r.holds = r.counterexamples.empty() && r.lagrange;
  return r;
}

double product_form_constant(const ProductGroup& g)
{
  double c = 1.0;
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    const FiniteGroup& f = g.factor(i);
    if (f.order() < 2)
      continue;
    TabulatedGroup t = TabulatedGroup::from(f);
    c = std::min(c, std::log(double(min_proper_index(t))) / std::log(double(f.order())));
  }
  return c;
}

ProductFormReport product_form(const ProductGroup& g, const std::vector<Id>& members, double c)
{
  std::vector<Id> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  if (!is_subgroup(g, sorted))
    throw std::invalid_argument("not a subgroup");
  ProductFormReport r;
  r.c = c;
  double log_prod = 0;
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    std::vector<char> hit(g.factor(i).order(), 0);
    std::size_t count = 0;
    for (Id h : sorted) {
      Id y = g.project(h, i);
      if (!hit[y]) {
        hit[y] = 1;
        ++count;
      }
    }
    r.projection_orders.push_back(count);
    r.factor_indices.push_back(g.factor(i).order() / count);
    log_prod += std::log(double(r.factor_indices.back()));
  }
  r.index = g.order() / sorted.size();
  if (r.index == 1) {
    r.holds = true;
    return r;
  }
  const double log_index = std::log(double(r.index));
  r.exponent = log_prod / log_index;
  r.holds = log_prod >= c * log_index - 1e-12;
  return r;
}

std::vector<Id> sample_product_subgroup(const ProductGroup& g, std::mt19937_64& rng)
{
  const std::size_t k = g.num_factors();
  std::vector<Id> a(k), b(k);
  for (std::size_t i = 0; i < k; ++i) {
    const FiniteGroup& f = g.factor(i);
    std::uniform_int_distribution<Id> pick(0, Id(f.order() - 1));
    Id x = pick(rng);
    switch (rng() % 4) {
      case 0:
        a[i] = x;
        b[i] = pick(rng);
        break;
      case 1:
        a[i] = x;
        b[i] = FiniteGroup::identity();
        break;
      case 2:
        a[i] = f.pow(x, rng() % 6);
        b[i] = f.pow(x, rng() % 6);
        break;
      default:
        a[i] = b[i] = FiniteGroup::identity();
    }
  }
  return closure(g, {g.encode(a), g.encode(b)});
}

LiftSet small_lifts(const GroupEnum& g, const SubgroupDesc& h, double delta, const std::vector<RatMatrix>& gens,
                    const Poly& r0, unsigned word_cap)
{
  if (gens.empty())
    throw std::invalid_argument("empty generating set");
  LiftSet out;
  out.delta = delta;
  out.height_bound = delta * std::log(double(g.order()) / double(h.order()));
  const auto places = height_places(r0);
  const std::uint32_t p = gens.front().field().p;
  std::vector<Id> ids;
  for (const Mat& m : reduce_all(gens, g.algebra())) {
    auto id = g.find(m);
    if (!id)
      throw std::invalid_argument("generator does not reduce into the group");
    ids.push_back(*id);
  }

  std::vector<std::uint32_t> word;
  auto visit = [&](auto&& self, const RatMatrix& m, Id id) -> void {
    ++out.words_enumerated;
    if (h.contains(id) && matrix_height(m, places).log(p) < out.height_bound)
      out.lifts.push_back({m, word});
    if (word.size() == word_cap)
      return;
    for (std::uint32_t s = 0; s < gens.size(); ++s) {
      word.push_back(s);
      self(self, m * gens[s], g.mul(id, ids[s]));
      word.pop_back();
    }
  };
  visit(visit, RatMatrix::identity(gens.front().field(), gens.front().dim()), FiniteGroup::identity());
  return out;
}

FreenessReport freeness_certificate(const std::vector<RatMatrix>& gens, unsigned k)
{
  if (gens.empty())
    throw std::invalid_argument("empty generating set");
  std::vector<RatMatrix> letters;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    letters.push_back(gens[i]);
    letters.push_back(gens[i].inverse());
    names.push_back("g" + std::to_string(i));
    names.push_back("g" + std::to_string(i) + "^-1");
  }
  FreenessReport r;
  std::map<RatMatrix, std::string> seen;
  const RatMatrix id = RatMatrix::identity(gens.front().field(), gens.front().dim());
  seen.emplace(id, "e");
  ++r.words;
  // Breadth-first by length so the first relation found is a shortest one.
  struct Node {
    RatMatrix m;
    std::string name;
    std::size_t last;
  };
  std::vector<Node> layer{{id, "", letters.size()}};
  for (unsigned len = 1; len <= 2 * k; ++len) {
    std::vector<Node> next;
    for (const Node& w : layer)
      for (std::size_t l = 0; l < letters.size(); ++l) {
        if (w.last < letters.size() && (w.last ^ 1) == l)
          continue;
        Node v{w.m * letters[l], w.name.empty() ? names[l] : w.name + " " + names[l], l};
        ++r.words;
        auto [it, fresh] = seen.emplace(v.m, v.name);
        if (!fresh) {
          r.relation = std::make_pair(it->second, v.name);
          return r;
        }
        next.push_back(std::move(v));
      }
    layer = std::move(next);
  }
  r.free = true;
  return r;
}

void to_json(nlohmann::json& j, const TransporterReport& r)
{
  j = {{"holds", r.holds},
       {"q", r.q},
       {"n", r.n},
       {"cosets", r.cosets},
       {"transporting", r.transporting},
       {"ambient_checked", r.ambient_checked}};
  j["witness"] = r.witness ? nlohmann::json(*r.witness) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const IntersectionReport& r)
{
  j = {{"holds", r.holds},         {"checked", r.checked}, {"distinct", r.distinct},
       {"tags", r.tags},           {"lagrange", r.lagrange}, {"counterexamples", r.counterexamples}};
}

void to_json(nlohmann::json& j, const ProductFormReport& r)
{
  j = {{"projection_orders", r.projection_orders},
       {"factor_indices", r.factor_indices},
       {"index", r.index},
       {"exponent", r.exponent},
       {"c", r.c},
       {"holds", r.holds}};
}

void to_json(nlohmann::json& j, const FreenessReport& r)
{
  j = {{"free", r.free}, {"words", r.words}};
  if (r.relation)
    j["relation"] = {r.relation->first, r.relation->second};
}

}  // namespace ffexp
