#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/group.hpp"

namespace ffexp {

enum class StructuralKind { Borel, TorusNormalizerSplit, TorusNormalizerNonsplit, Exceptional, Other };

struct SubgroupTag {
  enum class Kind { Unclassified, Full, Central, Subfield, Structural };
  Kind kind = Kind::Unclassified;
  StructuralKind structural = StructuralKind::Other;
  /// q' for Subfield tags.
  std::uint64_t subfield_size = 0;

  static SubgroupTag full() { return {Kind::Full, StructuralKind::Other, 0}; }
  static SubgroupTag central() { return {Kind::Central, StructuralKind::Other, 0}; }
  static SubgroupTag subfield(std::uint64_t q) { return {Kind::Subfield, StructuralKind::Other, q}; }
  static SubgroupTag structural_of(StructuralKind k) { return {Kind::Structural, k, 0}; }

  std::string to_string() const;
  friend bool operator==(const SubgroupTag&, const SubgroupTag&) = default;
};

std::string to_string(StructuralKind k);

/// A subgroup given by its sorted member ids.
struct SubgroupDesc {
  std::string parent_hash;
  std::vector<Id> members;
  std::vector<Id> generators;
  SubgroupTag tag;

  std::size_t order() const { return members.size(); }
  bool contains(Id x) const;
};

void to_json(nlohmann::json& j, const SubgroupDesc& h);

/// Sorted closure of gens (the identity is always included).
std::vector<Id> closure(const FiniteGroup& g, const std::vector<Id>& gens);
SubgroupDesc make_subgroup(const FiniteGroup& g, std::vector<Id> gens);
/// Subgroup from a member list; checks closure and picks a small generating set.
SubgroupDesc subgroup_from_members(const FiniteGroup& g, std::vector<Id> members);
bool is_subgroup(const FiniteGroup& g, const std::vector<Id>& sorted_members);
/// Greedy generating set of a subgroup given by its members.
std::vector<Id> generating_set(const FiniteGroup& g, const std::vector<Id>& sorted_members);

std::vector<Id> intersect(const std::vector<Id>& a, const std::vector<Id>& b);
/// {x g x^-1 : g in members}, sorted.
std::vector<Id> conjugate_set(const FiniteGroup& g, const std::vector<Id>& members, Id x);
std::vector<Id> center(const FiniteGroup& g);
bool is_abelian(const FiniteGroup& g, const std::vector<Id>& members);
/// Commutator subgroup of a subgroup.
std::vector<Id> derived_subgroup(const FiniteGroup& g, const std::vector<Id>& members);

/// Every subgroup of a small group (order <= 20000), as joins of cyclic
/// subgroups; sorted by (order, members).
std::vector<SubgroupDesc> all_subgroups(const FiniteGroup& g);

/// Smallest index of a proper subgroup, from the full subgroup list.
std::uint64_t min_proper_index(const FiniteGroup& g);

}  // namespace ffexp
