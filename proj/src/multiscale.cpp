#include "ffexp/multiscale.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ffexp/classify.hpp"
#include "ffexp/walks.hpp"

namespace ffexp {

namespace {

std::vector<std::uint64_t> orders_of(const ProductGroup& g)
{
  std::vector<std::uint64_t> o;
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    o.push_back(g.factor(i).order());
  return o;
}

/// stride[k] = prod_{i<k} |G_i|, so x % stride[k] is the length-k prefix.
std::vector<std::uint64_t> strides_of(const std::vector<std::uint64_t>& orders)
{
  std::vector<std::uint64_t> s{1};
  for (auto o : orders)
    s.push_back(s.back() * o);
  return s;
}

void sort_unique(std::vector<Id>& v)
{
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Prefix tree of a set: nodes[k] are the sorted distinct length-k prefixes,
/// parent[k][j] indexes nodes[k-1], mass[k][j] counts leaves below.
struct PrefixTree {
  std::vector<std::vector<std::uint64_t>> nodes;
  std::vector<std::vector<std::size_t>> parent;
  std::vector<std::vector<std::size_t>> mass;
  std::vector<std::vector<std::vector<std::size_t>>> children;

  PrefixTree(const std::vector<Id>& sorted, const std::vector<std::uint64_t>& strides)
  {
    const std::size_t n = strides.size() - 1;
    nodes.resize(n + 1);
    parent.resize(n + 1);
    mass.resize(n + 1);
    children.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      for (Id x : sorted)
        nodes[k].push_back(k == n ? x : x % strides[k]);
      std::sort(nodes[k].begin(), nodes[k].end());
      nodes[k].erase(std::unique(nodes[k].begin(), nodes[k].end()), nodes[k].end());
    }
    for (std::size_t k = 1; k <= n; ++k) {
      children[k - 1].assign(nodes[k - 1].size(), {});
      for (std::size_t j = 0; j < nodes[k].size(); ++j) {
        auto it = std::lower_bound(nodes[k - 1].begin(), nodes[k - 1].end(), nodes[k][j] % strides[k - 1]);
        parent[k].push_back(std::size_t(it - nodes[k - 1].begin()));
        children[k - 1][parent[k].back()].push_back(j);
      }
    }
    mass[n].assign(nodes[n].size(), 1);
    for (std::size_t k = n; k > 0; --k) {
      mass[k - 1].assign(nodes[k - 1].size(), 0);
      for (std::size_t j = 0; j < nodes[k].size(); ++j)
        mass[k - 1][parent[k][j]] += mass[k][j];
    }
  }
  std::size_t levels() const { return nodes.size() - 1; }
};

double level_threshold(std::uint64_t order, double delta) { return std::pow(double(order), delta); }

struct ExactSearch {
  const PrefixTree& tree;
  std::vector<double> thr;
  std::vector<std::uint64_t> max_children;
  std::vector<std::uint64_t> best_D;
  std::uint64_t best = 0;
  std::vector<std::uint64_t> D;

  ExactSearch(const PrefixTree& t, std::vector<double> thresholds) : tree(t), thr(std::move(thresholds))
  {
    const std::size_t n = t.levels();
    max_children.assign(n, 1);
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& ch : t.children[k])
        max_children[k] = std::max<std::uint64_t>(max_children[k], ch.size());
    D.assign(n, 1);
  }

  /// feas flags nodes at level k+1; product is prod_{j>k} D_j.
  void run(std::size_t k, const std::vector<char>& feas, std::uint64_t product)
  {
    std::uint64_t ub = product;
    for (std::size_t j = 0; j <= k; ++j)
      ub *= max_children[j];
    if (ub <= best)
      return;
    std::vector<std::uint64_t> count(tree.nodes[k].size(), 0);
    for (std::size_t j = 0; j < feas.size(); ++j)
      if (feas[j])
        ++count[tree.parent[k + 1][j]];
    std::vector<std::uint64_t> cand;
    for (auto c : count)
      if (c >= 1 && double(c) > thr[k])
        cand.push_back(c);
    cand.push_back(1);
    std::sort(cand.begin(), cand.end(), std::greater<>());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    if (k == 0) {
      // Single root: only its own count matters.
      const std::uint64_t c = count[0];
      if (c == 0)
        return;
      const std::uint64_t d = double(c) > thr[0] ? c : 1;
      if (d * product > best) {
        best = d * product;
        D[0] = d;
        best_D = D;
      }
      return;
    }
    for (auto d : cand) {
      std::vector<char> next(count.size());
      bool any = false;
      for (std::size_t j = 0; j < count.size(); ++j) {
        next[j] = count[j] >= d;
        any = any || next[j];
      }
      if (!any)
        continue;
      D[k] = d;
      run(k - 1, next, product * d);
    }
  }
};

/// Keeps, below each selected node, `D_k` feasible children chosen by mass
/// then smallest prefix.
std::vector<Id> build_regular(const PrefixTree& tree, const std::vector<std::uint64_t>& D)
{
  const std::size_t n = tree.levels();
  std::vector<std::vector<char>> feas(n + 1);
  feas[n].assign(tree.nodes[n].size(), 1);
  for (std::size_t k = n; k > 0; --k) {
    std::vector<std::uint64_t> count(tree.nodes[k - 1].size(), 0);
    for (std::size_t j = 0; j < tree.nodes[k].size(); ++j)
      if (feas[k][j])
        ++count[tree.parent[k][j]];
    feas[k - 1].resize(count.size());
    for (std::size_t j = 0; j < count.size(); ++j)
      feas[k - 1][j] = count[j] >= D[k - 1];
  }
  std::vector<std::size_t> selected{0};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> next;
    for (std::size_t v : selected) {
      std::vector<std::size_t> ch;
      for (std::size_t c : tree.children[k][v])
        if (feas[k + 1][c])
          ch.push_back(c);
      std::stable_sort(ch.begin(), ch.end(),
                       [&](std::size_t a, std::size_t b) { return tree.mass[k + 1][a] > tree.mass[k + 1][b]; });
      if (ch.size() < D[k])
        throw std::logic_error("regularize: infeasible profile");
      next.insert(next.end(), ch.begin(), ch.begin() + std::ptrdiff_t(D[k]));
    }
    std::sort(next.begin(), next.end());
    selected = std::move(next);
  }
  std::vector<Id> a;
  for (std::size_t j : selected)
    a.push_back(Id(tree.nodes[n][j]));
  return a;
}

std::vector<Id> dyadic_regular(const PrefixTree& tree, const std::vector<double>& thr, std::vector<std::uint64_t>& D)
{
  const std::size_t n = tree.levels();
  std::vector<std::vector<char>> alive(n + 1);
  alive[n].assign(tree.nodes[n].size(), 1);
  std::uint64_t unit = 1;
  D.assign(n, 1);
  for (std::size_t k = n; k > 0; --k) {
    const std::size_t lvl = k - 1;
    std::vector<std::vector<std::size_t>> kids(tree.nodes[lvl].size());
    for (std::size_t v = 0; v < kids.size(); ++v)
      for (std::size_t c : tree.children[lvl][v])
        if (alive[k][c])
          kids[v].push_back(c);
    std::map<unsigned, std::uint64_t> class_mass;
    for (const auto& ks : kids)
      if (!ks.empty())
        class_mass[unsigned(std::bit_width(ks.size()) - 1)] += ks.size() * unit;
    unsigned best_class = 0;
    std::uint64_t best_mass = 0;
    for (const auto& [j, m] : class_mass)
      if (m >= best_mass) {
        best_mass = m;
        best_class = j;
      }
    std::uint64_t keep = std::uint64_t(1) << best_class;
    if (double(keep) <= thr[lvl])
      keep = 1;
    D[lvl] = keep;
    std::fill(alive[k].begin(), alive[k].end(), 0);
    alive[lvl].assign(kids.size(), 0);
    for (std::size_t v = 0; v < kids.size(); ++v) {
      if (kids[v].empty() || unsigned(std::bit_width(kids[v].size()) - 1) != best_class)
        continue;
      alive[lvl][v] = 1;
      // Children all carry `unit` leaves; keep the largest prefixes.
      for (std::size_t i = kids[v].size() - keep; i < kids[v].size(); ++i)
        alive[k][kids[v][i]] = 1;
    }
    unit *= keep;
  }
  // Walk down from the root through surviving nodes.
  std::vector<std::size_t> selected{0};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> next;
    for (std::size_t v : selected)
      for (std::size_t c : tree.children[k][v])
        if (alive[k + 1][c])
          next.push_back(c);
    selected = std::move(next);
  }
  std::vector<Id> a;
  for (std::size_t j : selected)
    a.push_back(Id(tree.nodes[n][j]));
  std::sort(a.begin(), a.end());
  return a;
}

/// Left-coset label min_{h in H} x h.
Id coset_label(const FiniteGroup& g, Id x, const std::vector<Id>& h)
{
  Id best = std::numeric_limits<Id>::max();
  for (Id y : h)
    best = std::min(best, g.mul(x, y));
  return best;
}

std::vector<char> as_bitset(std::size_t n, const std::vector<Id>& xs)
{
  std::vector<char> b(n, 0);
  for (Id x : xs)
    b[x] = 1;
  return b;
}

}  // namespace

bool pairwise_distinct_orders(const ProductGroup& g)
{
  auto o = orders_of(g);
  std::sort(o.begin(), o.end());
  return std::adjacent_find(o.begin(), o.end()) == o.end();
}

bool RegularProfile::levels_ok() const
{
  for (std::size_t i = 0; i < D.size(); ++i)
    if (D[i] != 1 && !(double(D[i]) > level_threshold(factor_orders[i], delta)))
      return false;
  return true;
}

bool RegularProfile::size_ok() const
{
  double log_total = 0;
  for (auto o : factor_orders)
    log_total += std::log(double(o));
  return std::log(double(A.size())) > -2 * delta * log_total + std::log(double(source_size));
}

RegularityCheck check_regular(const ProductGroup& g, std::vector<Id> a)
{
  if (a.empty())
    throw std::invalid_argument("regularity of an empty set");
  sort_unique(a);
  const auto orders = orders_of(g);
  const auto strides = strides_of(orders);
  PrefixTree tree(a, strides);
  RegularityCheck r;
  RegularProfile p;
  p.factor_orders = orders;
  for (std::size_t k = 0; k < tree.levels(); ++k) {
    const std::uint64_t expected = tree.children[k][0].size();
    for (std::size_t v = 0; v < tree.children[k].size(); ++v) {
      if (tree.children[k][v].size() == expected)
        continue;
      r.regular = false;
      r.failure_level = unsigned(k);
      r.expected = expected;
      r.found = tree.children[k][v].size();
      const std::uint64_t prefix = tree.nodes[k][v];
      for (std::size_t i = 0; i < k; ++i)
        r.failure_prefix.push_back(Id((prefix / strides[i]) % orders[i]));
      return r;
    }
    p.D.push_back(expected);
  }
  r.regular = true;
  p.A = std::move(a);
  p.source_size = p.A.size();
  r.profile = std::move(p);
  return r;
}

RegularProfile regularize(const ProductGroup& g, std::vector<Id> s, double delta, RegularizeMode mode)
{
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("regularize needs 0 < delta < 1");
  if (s.empty())
    throw std::invalid_argument("regularize of an empty set");
  sort_unique(s);
  const auto orders = orders_of(g);
  PrefixTree tree(s, strides_of(orders));
  std::vector<double> thr;
  for (auto o : orders)
    thr.push_back(level_threshold(o, delta));

  RegularProfile p;
  p.delta = delta;
  p.factor_orders = orders;
  p.source_size = s.size();
  if (mode == RegularizeMode::Exact) {
    ExactSearch search(tree, thr);
    const std::size_t n = tree.levels();
    search.run(n - 1, std::vector<char>(tree.nodes[n].size(), 1), 1);
    p.D = search.best_D;
    p.A = build_regular(tree, p.D);
  } else {
    p.A = dyadic_regular(tree, thr, p.D);
  }
  auto check = check_regular(g, p.A);
  if (!check.regular || check.profile->D != p.D)
    throw std::logic_error("regularize produced a non-regular set");
  return p;
}

ScaleSplit scale_split(const RegularProfile& profile, unsigned L)
{
  if (L < 1)
    throw std::invalid_argument("scale_split needs L >= 1");
  ScaleSplit s;
  s.L = L;
  const double e = 1.0 - 1.0 / (3.0 * L);
  for (std::size_t i = 0; i < profile.D.size(); ++i) {
    if (double(profile.D[i]) >= std::pow(double(profile.factor_orders[i]), e))
      s.I_l.push_back(i);
    else
      s.I_s.push_back(i);
  }
  return s;
}

std::vector<Id> product_set(const FiniteGroup& g, const std::vector<Id>& x, const std::vector<Id>& y)
{
  const std::size_t n = g.order();
  std::vector<char> hit(n, 0);
  std::size_t count = 0;
  for (Id a : x) {
    for (Id b : y) {
      Id c = g.mul(a, b);
      if (!hit[c]) {
        hit[c] = 1;
        ++count;
      }
    }
    if (count == n)
      break;
  }
  std::vector<Id> out;
  out.reserve(count);
  for (Id c = 0; c < n; ++c)
    if (hit[c])
      out.push_back(c);
  return out;
}

bool scales_without_room(const ProductGroup& g, const std::vector<Id>& a, const ScaleSplit& split)
{
  if (split.I_l.empty())
    return true;
  std::vector<std::shared_ptr<const FiniteGroup>> factors;
  for (auto i : split.I_l)
    factors.push_back(g.factor_ptr(i));
  ProductGroup sub(factors);
  std::vector<Id> proj;
  for (Id x : a) {
    std::vector<Id> parts;
    for (auto i : split.I_l)
      parts.push_back(g.project(x, i));
    proj.push_back(sub.encode(parts));
  }
  sort_unique(proj);
  auto aaa = product_set(sub, product_set(sub, proj, proj), proj);
  return aaa.size() == sub.order();
}

unsigned quasirandom_L(std::uint64_t order, std::uint64_t d_min)
{
  if (d_min < 2)
    throw std::invalid_argument("a group with d_min = 1 is not quasi-random");
  unsigned L = 1;
  long double power = d_min;
  while (power < (long double)order) {
    power *= d_min;
    ++L;
  }
  return L;
}

unsigned quasirandom_L(const FiniteGroup& g)
{
  return quasirandom_L(g.order(), quasirandomness(g).d_min);
}

GowersReport gowers_check(const FiniteGroup& g, const std::vector<Id>& a1, const std::vector<Id>& a2,
                          const std::vector<Id>& a3, unsigned L)
{
  if (a1.empty() || a2.empty() || a3.empty())
    throw std::invalid_argument("gowers_check needs nonempty sets");
  auto u1 = a1, u2 = a2, u3 = a3;
  sort_unique(u1);
  sort_unique(u2);
  sort_unique(u3);
  GowersReport r;
  r.L = L;
  const double logg = std::log(double(g.order()));
  r.mean_h0 = (std::log(double(u1.size())) + std::log(double(u2.size())) + std::log(double(u3.size()))) / 3;
  r.threshold = (1.0 - 1.0 / (3.0 * L)) * logg;
  r.hypothesis = r.mean_h0 > r.threshold;
  auto p = product_set(g, product_set(g, u1, u2), u3);
  r.product_size = p.size();
  r.coverage = double(p.size()) / double(g.order());
  r.covers = p.size() == g.order();
  r.holds = !r.hypothesis || r.covers;
  return r;
}

double metric_d(const ProductGroup& g, Id x, Id y, const std::vector<std::size_t>& I_s)
{
  double d = 0;
  for (auto i : I_s)
    if (g.project(x, i) != g.project(y, i))
      d += std::log(double(g.factor(i).order()));
  return d;
}

double approx_hom_defect(const FiniteGroup& domain, const ProductGroup& codomain,
                         const std::vector<std::optional<Id>>& psi, const std::vector<std::pair<Id, Id>>& pairs)
{
  std::vector<std::size_t> all(codomain.num_factors());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto at = [&](Id x) {
    if (x >= psi.size() || !psi[x])
      throw std::out_of_range("psi is not tabulated at " + std::to_string(x));
    return *psi[x];
  };
  double t = 0;
  for (auto [x, y] : pairs) {
    t = std::max(t, metric_d(codomain, at(domain.mul(x, y)), codomain.mul(at(x), at(y)), all));
    for (Id z : {x, y})
      t = std::max(t, metric_d(codomain, at(domain.inv(z)), codomain.inv(at(z)), all));
  }
  return t;
}

double max_coset_mass(const FiniteGroup& g, const std::vector<Id>& s, const SubgroupDesc& h)
{
  if (s.empty())
    return 0;
  std::map<Id, std::size_t> count;
  std::size_t best = 0;
  for (Id x : s)
    best = std::max(best, ++count[coset_label(g, x, h.members)]);
  return double(best) / double(s.size());
}

ExceptionalReport exceptional_count(const Measure<double>& nu, const std::vector<SubgroupDesc>& lower,
                                    const std::vector<SubgroupDesc>& family, double p, double p_prime, unsigned L)
{
  const FiniteGroup& g = nu.parent();
  ExceptionalReport r;
  r.p = p;
  r.p_prime = p_prime;
  r.L = L;
  for (const auto& h : lower) {
    std::map<Id, double> mass;
    nu.for_each([&](Id x, double w) { mass[coset_label(g, x, h.members)] += w; });
    for (const auto& [label, w] : mass)
      r.max_lower_coset_mass = std::max(r.max_lower_coset_mass, w);
  }
  r.coset_hypothesis = r.max_lower_coset_mass < p;
  r.p_prime_hypothesis = p_prime > std::sqrt(2.0 * L * p);
  r.intersection_hypothesis = true;
  for (std::size_t i = 0; i < family.size() && r.intersection_hypothesis; ++i)
    for (std::size_t j = i + 1; j < family.size() && r.intersection_hypothesis; ++j) {
      auto meet = intersect(family[i].members, family[j].members);
      bool found = false;
      for (const auto& h : lower)
        if (meet.size() <= std::size_t(L) * intersect(meet, h.members).size()) {
          found = true;
          break;
        }
      r.intersection_hypothesis = found;
    }
  r.hypotheses = p > 0 && p < 1 && p_prime > 0 && p_prime < 1 && r.coset_hypothesis && r.p_prime_hypothesis &&
                 r.intersection_hypothesis;
  auto mix = convolve(tilde(nu), nu);
  for (std::size_t i = 0; i < family.size(); ++i) {
    double m = 0;
    for (Id x : family[i].members)
      m += mix.at(x);
    r.masses.push_back(m);
    if (m > p_prime)
      r.exceptional.push_back(i);
  }
  r.bound = std::sqrt(2.0 / (L * p * p_prime));
  r.holds = !r.hypotheses || double(r.exceptional.size()) < r.bound;
  return r;
}

ConjugacyExpansion conjugacy_expansion(const FiniteGroup& g, const std::vector<Id>& s, Id x, double eps, double delta)
{
  if (s.empty())
    throw std::invalid_argument("conjugacy_expansion needs a nonempty set");
  auto u = s;
  sort_unique(u);
  ConjugacyExpansion r;
  std::set<Id> conj;
  for (Id y : u)
    conj.insert(g.conj(y, x));
  r.count = conj.size();
  std::vector<Id> centralizer;
  for (Id y = 0; y < g.order(); ++y)
    if (g.mul(y, x) == g.mul(x, y))
      centralizer.push_back(y);
  r.class_size = g.order() / centralizer.size();
  SubgroupDesc c;
  c.members = centralizer;
  r.max_coset_mass = max_coset_mass(g, u, c);
  const double logg = std::log(double(g.order()));
  const double logcl = std::log(double(r.class_size));
  r.hypothesis = std::log(r.max_coset_mass) <= -eps * logcl + delta * logg + 1e-12;
  r.bound = std::exp(eps * logcl - delta * logg);
  r.holds = !r.hypothesis || double(r.count) >= r.bound * (1 - 1e-12);
  return r;
}

std::vector<SubgroupDesc> Sl2Families::all() const
{
  std::vector<SubgroupDesc> out;
  for (const auto& l : levels)
    out.insert(out.end(), l.begin(), l.end());
  for (const auto& l : subfield)
    out.insert(out.end(), l.begin(), l.end());
  return out;
}

std::vector<SubgroupDesc> conjugacy_class_of(const FiniteGroup& g, const SubgroupDesc& h)
{
  std::set<std::vector<Id>> seen;
  std::vector<SubgroupDesc> out;
  for (Id x = 0; x < g.order(); ++x) {
    auto c = conjugate_set(g, h.members, x);
    if (!seen.insert(c).second)
      continue;
    SubgroupDesc d;
    d.parent_hash = h.parent_hash;
    d.members = std::move(c);
    for (Id y : h.generators)
      d.generators.push_back(g.conj(x, y));
    d.tag = h.tag;
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.members < b.members; });
  return out;
}

Sl2Families sl2_families(std::shared_ptr<const GroupEnum> g)
{
  if (g->quotient() != Quotient::Linear)
    throw std::invalid_argument("sl2_families expects SL_2");
  Sl2Classifier cls(g);
  auto menu = cls.structural_menu();
  const SubgroupDesc& borel = menu[0];
  const SubgroupDesc& split_n = menu[1];
  const SubgroupDesc& nonsplit_n = menu[2];
  const SubgroupDesc& z = menu[3];

  auto split_t = subgroup_from_members(*g, intersect(borel.members, split_n.members));
  std::vector<Id> ns;
  for (Id x : nonsplit_n.members) {
    Mat m = g->element(x);
    if (m(0, 0) == m(1, 1))
      ns.push_back(x);
  }
  auto nonsplit_t = subgroup_from_members(*g, ns);

  Sl2Families f;
  f.levels.push_back({z});
  std::vector<SubgroupDesc> tori = conjugacy_class_of(*g, split_t);
  auto nt = conjugacy_class_of(*g, nonsplit_t);
  tori.insert(tori.end(), nt.begin(), nt.end());
  f.levels.push_back(std::move(tori));
  std::vector<SubgroupDesc> top;
  for (const auto* h : {&borel, &split_n, &nonsplit_n}) {
    auto c = conjugacy_class_of(*g, *h);
    top.insert(top.end(), c.begin(), c.end());
  }
  f.levels.push_back(std::move(top));
  for (auto q : cls.proper_subfields())
    f.subfield.push_back(conjugacy_class_of(*g, cls.subfield_subgroup(q)));
  return f;
}

VarjuParams varju_params(unsigned L, double eps, unsigned m, std::size_t m_prime, double log_order)
{
  if (L < 1 || !(eps > 0))
    throw std::invalid_argument("varju_params needs L >= 1 and eps > 0");
  if (m >= L)
    throw std::invalid_argument("(V3) needs m < L");
  if (double(m_prime) > L * log_order)
    throw std::invalid_argument("(V3) needs m' <= L log|G|");
  VarjuParams v;
  v.L = L;
  v.epsilon = eps;
  v.m = m;
  v.m_prime = m_prime;
  v.delta = std::min(std::pow(eps, 5), 1.0) / (8.0 * L);
  return v;
}

GrowthReport growth_experiment(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& s, double eps,
                               double delta, const std::vector<CosetFamilyMember>& families, std::uint64_t seed,
                               std::uint64_t budget, std::size_t samples)
{
  auto u = s;
  sort_unique(u);
  if (u.size() < 2)
    throw std::invalid_argument("growth_experiment needs |S| >= 2");
  GrowthReport r;
  r.seed = seed;
  r.s_size = u.size();
  r.g_order = g->order();
  const double logg = std::log(double(g->order()));
  const double logs = std::log(double(u.size()));

  bool symmetric = true;
  for (Id x : u)
    symmetric = symmetric && std::binary_search(u.begin(), u.end(), g->inv(x));
  r.checks.push_back({"symmetric", symmetric, symmetric ? 1.0 : 0.0, 1.0});
  r.checks.push_back({"size", logs < (1 - eps) * logg, logs / logg, 1 - eps});
  const auto* prod = dynamic_cast<const ProductGroup*>(g.get());
  if (prod)
    r.checks.push_back({"distinct_factor_orders", pairwise_distinct_orders(*prod), 0, 0});

  // Coset condition P_S(gH) < [G:H]^-eps |G|^delta; the trivial subgroup of
  // every factor is always included.
  std::vector<CosetFamilyMember> fam = families;
  SubgroupDesc trivial;
  trivial.members = {FiniteGroup::identity()};
  fam.push_back({std::nullopt, trivial});
  if (prod)
    for (std::size_t i = 0; i < prod->num_factors(); ++i)
      fam.push_back({i, trivial});
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : fam) {
    double mass, index;
    if (f.factor) {
      if (!prod)
        throw std::invalid_argument("factor-indexed family on a non-product group");
      const FiniteGroup& gi = prod->factor(*f.factor);
      std::vector<Id> proj;
      for (Id x : u)
        proj.push_back(prod->project(x, *f.factor));
      mass = max_coset_mass(gi, proj, f.h);
      index = double(gi.order()) / double(f.h.order());
    } else {
      mass = max_coset_mass(*g, u, f.h);
      index = double(g->order()) / double(f.h.order());
    }
    worst = std::max(worst, std::log(mass) + eps * std::log(index) - delta * logg);
  }
  r.checks.push_back({"coset", worst < 0, worst, 0});
  r.hypothesis = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.passed; });

  const std::uint64_t n = g->order();
  if (double(u.size()) * double(u.size()) > double(budget))
    throw BudgetExceeded("|S|^2 exceeds the product budget", u.size());
  auto ss = product_set(*g, u, u);
  auto in_ss = as_bitset(n, ss);
  // Union of the translates SS s, stopping once G is covered.
  std::vector<char> hit(n, 0);
  std::size_t count = 0;
  double work = double(u.size()) * double(u.size());
  for (Id b : u) {
    if (count == n || work > double(budget))
      break;
    for (Id a : ss) {
      Id c = g->mul(a, b);
      count += !hit[c];
      hit[c] = 1;
    }
    work += double(ss.size());
  }
  if (count == n || work <= double(budget)) {
    r.triple_size = count;
    r.ci_low = r.ci_high = double(count);
  } else {
    r.exact = false;
    std::vector<Id> inv_s;
    for (Id x : u)
      inv_s.push_back(g->inv(x));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Id> pick(0, Id(n - 1));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
      const Id x = pick(rng);
      for (Id a : inv_s)
        if (in_ss[g->mul(x, a)]) {
          ++hits;
          break;
        }
    }
    const double ns = double(samples), ph = double(hits) / ns, z = 1.96;
    const double den = 1 + z * z / ns;
    const double centre = (ph + z * z / (2 * ns)) / den;
    const double half = z * std::sqrt(ph * (1 - ph) / ns + z * z / (4 * ns * ns)) / den;
    r.triple_size = std::size_t(std::llround(ph * double(n)));
    r.ci_low = std::max(0.0, centre - half) * double(n);
    r.ci_high = std::min(1.0, centre + half) * double(n);
    r.ci_low = std::min(r.ci_low, double(r.triple_size));
    r.ci_high = std::max(r.ci_high, double(r.triple_size));
  }
  r.exponent = std::log(double(std::max<std::size_t>(r.triple_size, 1))) / logs - 1;
  return r;
}

HelfgottReport helfgott_chain(const FiniteGroup& g, const std::vector<Id>& s, unsigned k_max)
{
  if (k_max < 3)
    throw std::invalid_argument("helfgott_chain needs k_max >= 3");
  auto u = s;
  sort_unique(u);
  if (u.empty())
    throw std::invalid_argument("helfgott_chain needs a nonempty set");
  HelfgottReport r;
  std::vector<Id> cur = u;
  r.sizes.push_back(cur.size());
  for (unsigned k = 2; k <= k_max; ++k) {
    cur = product_set(g, cur, u);
    r.sizes.push_back(cur.size());
  }
  const double ls = std::log(double(r.sizes[0])), l3 = std::log(double(r.sizes[2]));
  for (unsigned k = 4; k <= k_max; ++k) {
    const double lhs = (k - 2) * (l3 - ls);
    const double rhs = std::log(double(r.sizes[k - 1])) - ls;
    r.rows.emplace_back(k, lhs, rhs);
    r.holds = r.holds && lhs >= rhs - 1e-12;
  }
  return r;
}

RenyiGainReport renyi_gain_experiment(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& a,
                                      const std::vector<Id>& b, unsigned m, std::size_t samples,
                                      std::mt19937_64& rng)
{
  const std::size_t n = g->order();
  if (n > 400)
    throw BudgetExceeded("renyi_gain_experiment is limited to |G| <= 400", n);
  auto ua = a, ub = b;
  sort_unique(ua);
  sort_unique(ub);
  if (ua.empty() || ub.empty() || samples == 0)
    throw std::invalid_argument("renyi_gain_experiment needs nonempty A, B and samples");
  RenyiGainReport r;
  r.m = m;
  r.tuples = samples;
  const double logg = std::log(double(n));
  r.base_h2 = std::log(double(ua.size()));
  r.alpha_prime = r.base_h2 / logg;
  r.alpha_double_prime = 1 - r.base_h2 / logg;
  r.initial_entropy = r.alpha_prime > 0;
  r.room_for_improvement = r.alpha_double_prime > 1e-12;
  r.hypothesis = r.initial_entropy && r.room_for_improvement;

  const std::size_t N = std::size_t(1) << (m + 1);
  const double wa = 1.0 / double(ua.size());
  auto times_a = [&](const std::vector<double>& mu) {
    std::vector<double> out(n, 0.0);
    for (Id x = 0; x < n; ++x)
      if (mu[x] != 0)
        for (Id y : ua)
          out[g->mul(x, y)] += mu[x] * wa;
    return out;
  };
  std::uniform_int_distribution<std::size_t> pick(0, ub.size() - 1);
  r.min_gain = std::numeric_limits<double>::infinity();
  r.max_gain = -std::numeric_limits<double>::infinity();
  double sum = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    std::vector<double> mu(n, 0.0);
    for (Id y : ua)
      mu[y] = wa;
    for (std::size_t j = 1; j < N; ++j) {
      const Id y = ub[pick(rng)];
      std::vector<double> shifted(n, 0.0);
      for (Id x = 0; x < n; ++x)
        shifted[g->mul(x, y)] = mu[x];
      mu = times_a(shifted);
    }
    mu = times_a(mu);
    double sq = 0;
    for (double w : mu)
      sq += w * w;
    const double h2 = -std::log(sq);
    r.h2.push_back(h2);
    const double gain = h2 - r.base_h2;
    sum += gain;
    r.min_gain = std::min(r.min_gain, gain);
    r.max_gain = std::max(r.max_gain, gain);
  }
  r.mean_gain = sum / double(samples);
  return r;
}

void to_json(nlohmann::json& j, const RegularProfile& r)
{
  j = {{"D", r.D},
       {"size", r.A.size()},
       {"delta", r.delta},
       {"factor_orders", r.factor_orders},
       {"source_size", r.source_size},
       {"levels_ok", r.levels_ok()},
       {"size_ok", r.size_ok()}};
}

void to_json(nlohmann::json& j, const RegularityCheck& r)
{
  j = {{"regular", r.regular}};
  if (r.profile)
    j["D"] = r.profile->D;
  else
    j["failure"] = {{"level", r.failure_level},
                    {"prefix", r.failure_prefix},
                    {"expected", r.expected},
                    {"found", r.found}};
}

void to_json(nlohmann::json& j, const ScaleSplit& r)
{
  j = {{"I_l", r.I_l}, {"I_s", r.I_s}, {"L", r.L}, {"T", r.T}};
}

void to_json(nlohmann::json& j, const GowersReport& r)
{
  j = {{"L", r.L},         {"mean_h0", r.mean_h0},   {"threshold", r.threshold}, {"hypothesis", r.hypothesis},
       {"product_size", r.product_size}, {"coverage", r.coverage}, {"covers", r.covers}, {"holds", r.holds}};
}

void to_json(nlohmann::json& j, const ExceptionalReport& r)
{
  j = {{"p", r.p},
       {"p_prime", r.p_prime},
       {"L", r.L},
       {"max_lower_coset_mass", r.max_lower_coset_mass},
       {"hypothesis_checks",
        {{"coset", r.coset_hypothesis}, {"p_prime", r.p_prime_hypothesis}, {"intersection", r.intersection_hypothesis}}},
       {"hypotheses", r.hypotheses},
       {"masses", r.masses},
       {"exceptional", r.exceptional},
       {"bound", r.bound},
       {"holds", r.holds}};
}

void to_json(nlohmann::json& j, const ConjugacyExpansion& r)
{
  j = {{"count", r.count},   {"class_size", r.class_size},         {"bound", r.bound},
       {"max_coset_mass", r.max_coset_mass}, {"hypothesis", r.hypothesis}, {"holds", r.holds}};
}

void to_json(nlohmann::json& j, const VarjuParams& r)
{
  j = {{"L", r.L},         {"epsilon", r.epsilon},       {"delta", r.delta},
       {"m", r.m},         {"m_prime", r.m_prime},       {"non_canonical", r.non_canonical}};
}

void to_json(nlohmann::json& j, const HypothesisCheck& r)
{
  j = {{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"threshold", r.threshold}};
}

void to_json(nlohmann::json& j, const GrowthReport& r)
{
  j = {{"hypothesis_checks", r.checks},
       {"hypothesis", r.hypothesis},
       {"exponent", r.exponent},
       {"sizes", {{"S", r.s_size}, {"G", r.g_order}, {"SSS", r.triple_size}}},
       {"exact", r.exact},
       {"ci", {r.ci_low, r.ci_high}},
       {"seed", r.seed}};
}

void to_json(nlohmann::json& j, const HelfgottReport& r)
{
  auto rows = nlohmann::json::array();
  for (const auto& [k, lhs, rhs] : r.rows)
    rows.push_back({{"k", k}, {"lhs", lhs}, {"rhs", rhs}});
  j = {{"sizes", r.sizes}, {"rows", rows}, {"holds", r.holds}};
}

void to_json(nlohmann::json& j, const RenyiGainReport& r)
{
  j = {{"m", r.m},
       {"tuples", r.tuples},
       {"base_h2", r.base_h2},
       {"mean_gain", r.mean_gain},
       {"min_gain", r.min_gain},
       {"max_gain", r.max_gain},
       {"alpha_prime", r.alpha_prime},
       {"alpha_double_prime", r.alpha_double_prime},
       {"hypothesis_checks", {{"initial_entropy", r.initial_entropy}, {"room_for_improvement", r.room_for_improvement}}},
       {"hypothesis", r.hypothesis},
       {"h2", r.h2}};
}

}  // namespace ffexp
