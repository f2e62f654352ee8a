#include "ffexp/subgroup.hpp"

#include <algorithm>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ffexp/hash.hpp"

namespace ffexp {

std::string to_string(StructuralKind k)
{
  switch (k) {
    case StructuralKind::Borel:
      return "Borel";
    case StructuralKind::TorusNormalizerSplit:
      return "TorusNormalizerSplit";
    case StructuralKind::TorusNormalizerNonsplit:
      return "TorusNormalizerNonsplit";
    case StructuralKind::Exceptional:
      return "Exceptional";
    case StructuralKind::Other:
      return "Other";
  }
  return "?";
}

std::string SubgroupTag::to_string() const
{
  switch (kind) {
    case Kind::Unclassified:
      return "Unclassified";
    case Kind::Full:
      return "Full";
    case Kind::Central:
      return "Central";
    case Kind::Subfield:
      return "Subfield(" + std::to_string(subfield_size) + ")";
    case Kind::Structural:
      return "Structural(" + ffexp::to_string(structural) + ")";
  }
  return "?";
}

bool SubgroupDesc::contains(Id x) const { return std::binary_search(members.begin(), members.end(), x); }

void to_json(nlohmann::json& j, const SubgroupDesc& h)
{
  j = {{"parent_hash", h.parent_hash}, {"member_count", h.members.size()}, {"tag", h.tag.to_string()},
       {"generators", h.generators}};
}

std::vector<Id> closure(const FiniteGroup& g, const std::vector<Id>& gens)
{
  std::vector<char> in(g.order(), 0);
  std::vector<Id> out{FiniteGroup::identity()};
  in[0] = 1;
  for (std::size_t head = 0; head < out.size(); ++head)
    for (Id s : gens) {
      Id y = g.mul(out[head], s);
      if (!in[y]) {
        in[y] = 1;
        out.push_back(y);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

SubgroupDesc make_subgroup(const FiniteGroup& g, std::vector<Id> gens)
{
  SubgroupDesc h;
  h.parent_hash = g.hash();
  h.members = closure(g, gens);
  h.generators = std::move(gens);
  return h;
}

bool is_subgroup(const FiniteGroup& g, const std::vector<Id>& m)
{
  if (m.empty() || m.front() != 0)
    return false;
  auto gens = generating_set(g, m);
  for (Id a : m)
    for (Id s : gens)
      if (!std::binary_search(m.begin(), m.end(), g.mul(a, s)))
        return false;
  return true;
}

std::vector<Id> generating_set(const FiniteGroup& g, const std::vector<Id>& m)
{
  std::vector<Id> gens;
  std::vector<char> in(g.order(), 0);
  std::vector<Id> cur{0};
  in[0] = 1;
  for (Id x : m) {
    if (in[x])
      continue;
    gens.push_back(x);
    // Extend the closure by the new generator.
    cur = closure(g, gens);
    for (Id y : cur)
      in[y] = 1;
    if (cur.size() == m.size())
      break;
  }
  return gens;
}

SubgroupDesc subgroup_from_members(const FiniteGroup& g, std::vector<Id> members)
{
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (!is_subgroup(g, members))
    throw std::invalid_argument("member set is not a subgroup");
  SubgroupDesc h;
  h.parent_hash = g.hash();
  h.generators = generating_set(g, members);
  h.members = std::move(members);
  return h;
}

std::vector<Id> intersect(const std::vector<Id>& a, const std::vector<Id>& b)
{
  std::vector<Id> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<Id> conjugate_set(const FiniteGroup& g, const std::vector<Id>& members, Id x)
{
  std::vector<Id> out;
  out.reserve(members.size());
  Id xi = g.inv(x);
  for (Id m : members)
    out.push_back(g.mul(g.mul(x, m), xi));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Id> center(const FiniteGroup& g)
{
  std::vector<Id> all(g.order());
  for (Id i = 0; i < all.size(); ++i)
    all[i] = i;
  auto gens = generating_set(g, all);
  std::vector<Id> z;
  for (Id x = 0; x < g.order(); ++x) {
    bool central = true;
    for (Id s : gens)
      if (g.mul(x, s) != g.mul(s, x)) {
        central = false;
        break;
      }
    if (central)
      z.push_back(x);
  }
  return z;
}

bool is_abelian(const FiniteGroup& g, const std::vector<Id>& members)
{
  auto gens = generating_set(g, members);
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j)
      if (g.mul(gens[i], gens[j]) != g.mul(gens[j], gens[i]))
        return false;
  return true;
}

std::vector<Id> derived_subgroup(const FiniteGroup& g, const std::vector<Id>& members)
{
  std::vector<Id> comms;
  std::vector<char> seen(g.order(), 0);
  for (Id a : members)
    for (Id b : members) {
      Id c = g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b)));
      if (!seen[c]) {
        seen[c] = 1;
        comms.push_back(c);
      }
    }
  return closure(g, comms);
}

namespace {

using Bits = std::vector<std::uint64_t>;

Bits to_bits(const std::vector<Id>& members, std::size_t n)
{
  Bits b((n + 63) / 64, 0);
  for (Id x : members)
    b[x / 64] |= 1ull << (x % 64);
  return b;
}

struct BitsHash {
  std::size_t operator()(const Bits& b) const
  {
    Fnv1a h;
    for (auto w : b)
      h.add(w);
    return static_cast<std::size_t>(h.value());
  }
};

// <S, c> as a union of right cosets S r; only coset representatives are
// multiplied by the generators.
std::vector<Id> join(const FiniteGroup& g, const SubgroupDesc& s, Id c, std::vector<char>& scratch)
{
  std::vector<Id> gens = s.generators;
  gens.push_back(c);
  std::vector<Id> out = s.members;
  for (Id x : out)
    scratch[x] = 1;
  std::vector<Id> reps{FiniteGroup::identity()};
  for (std::size_t head = 0; head < reps.size(); ++head)
    for (Id t : gens) {
      Id y = g.mul(reps[head], t);
      if (scratch[y])
        continue;
      reps.push_back(y);
      for (Id h : s.members) {
        Id z = g.mul(h, y);
        scratch[z] = 1;
        out.push_back(z);
      }
    }
  for (Id x : out)
    scratch[x] = 0;
  return out;
}

}  // namespace

std::vector<SubgroupDesc> all_subgroups(const FiniteGroup& g)
{
  const std::size_t n = g.order();
  if (n > 20000)
    throw BudgetExceeded("subgroup census is limited to groups of order 20000", n);
  std::unordered_map<Bits, std::size_t, BitsHash> index;
  std::vector<SubgroupDesc> subs;
  auto add = [&](std::vector<Id> members, std::vector<Id> gens) {
    Bits b = to_bits(members, n);
    if (index.count(b))
      return;
    index.emplace(std::move(b), subs.size());
    std::sort(members.begin(), members.end());
    SubgroupDesc h;
    h.parent_hash = g.hash();
    h.members = std::move(members);
    h.generators = std::move(gens);
    subs.push_back(std::move(h));
  };

  // Cyclic subgroups, one generator each.
  std::vector<Id> cyclic_gens;
  std::vector<char> covered(n, 0);
  for (Id x = 0; x < n; ++x) {
    auto c = closure(g, {x});
    Bits b = to_bits(c, n);
    if (index.count(b))
      continue;
    cyclic_gens.push_back(x);
    add(std::move(c), {x});
  }

  std::vector<char> scratch(n, 0);
  for (std::size_t i = 0; i < subs.size(); ++i)
    for (Id c : cyclic_gens) {
      if (subs[i].contains(c))
        continue;
      auto m = join(g, subs[i], c, scratch);
      auto gens = subs[i].generators;
      gens.push_back(c);
      add(std::move(m), std::move(gens));
    }

  std::sort(subs.begin(), subs.end(), [](const SubgroupDesc& a, const SubgroupDesc& b) {
    if (a.members.size() != b.members.size())
      return a.members.size() < b.members.size();
    return a.members < b.members;
  });
  return subs;
}

std::uint64_t min_proper_index(const FiniteGroup& g)
{
  if (g.order() == 1)
    throw std::invalid_argument("trivial group has no proper subgroup");
  std::size_t best = 1;
  for (const auto& h : all_subgroups(g))
    if (h.order() < g.order())
      best = std::max(best, h.order());
  return g.order() / best;
}

}  // namespace ffexp
