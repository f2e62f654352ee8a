#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/group.hpp"
#include "ffexp/rational.hpp"
#include "ffexp/subgroup.hpp"

namespace ffexp {

/// Which g in PGL_2(F_{Q^2}), Q = q^n, conjugate PSL_2(F_q) into PGL_2(F_Q).
/// The transporter is a union of cosets g PGL_2(F_Q), one per Baer subline
/// g P^1(F_Q) of P^1(F_{Q^2}); every subline is tested.
struct TransporterReport {
  bool holds = false;
  std::uint64_t q = 0, n = 0;
  /// Number of sublines (cosets) swept.
  std::size_t cosets = 0;
  /// Sublines stabilized by PSL_2(F_q); 1 when the statement holds.
  std::size_t transporting = 0;
  /// Elements of PGL_2(F_Q) checked directly (all transport).
  std::size_t ambient_checked = 0;
  std::optional<std::string> witness;
};

/// q must be a prime > 5. Throws BudgetExceeded when P^1(F_{Q^2}) is too large.
TransporterReport transporter_check(std::uint32_t q, unsigned n);

struct IntersectionReport {
  bool holds = false;
  std::size_t checked = 0;
  std::size_t distinct = 0;
  std::map<std::string, std::size_t> tags;
  std::vector<std::string> counterexamples;
  /// Every intersection order divides |PGL_2(F_{q^m})|.
  bool lagrange = true;
};

/// For every g in PGL_2(F_{q^n}) outside PGL_2(F_{q^m}), classifies
/// g P g^-1 cap P with P = PGL_2(F_{q^m}). q prime, m | n, m < n.
IntersectionReport conjugate_intersection_check(std::uint32_t q, unsigned m, unsigned n);

struct ProductFormReport {
  std::vector<std::size_t> projection_orders;
  std::vector<std::uint64_t> factor_indices;
  std::uint64_t index = 1;
  /// log(prod factor_indices) / log[G:H]; 1 when [G:H] = 1.
  double exponent = 1.0;
  double c = 0.0;
  bool holds = false;
};

/// min_i log(min proper index of G_i) / log |G_i|.
double product_form_constant(const ProductGroup& g);
/// Throws std::invalid_argument when `members` is not a subgroup.
ProductFormReport product_form(const ProductGroup& g, const std::vector<Id>& members, double c);

/// A random subgroup of a direct product: generated by two elements whose
/// coordinates are random, trivial, or powers of a random element.
std::vector<Id> sample_product_subgroup(const ProductGroup& g, std::mt19937_64& rng);

struct Lift {
  RatMatrix matrix;
  /// Generator indices, left to right.
  std::vector<std::uint32_t> word;
};

struct LiftSet {
  double delta = 0;
  /// delta * log[G:H].
  double height_bound = 0;
  std::size_t words_enumerated = 0;
  std::vector<Lift> lifts;
};

/// Words of length <= word_cap in `gens` whose reduction lies in H and whose
/// log-height over D(r0) and v_infinity is strictly below delta log[G:H].
LiftSet small_lifts(const GroupEnum& g, const SubgroupDesc& h, double delta, const std::vector<RatMatrix>& gens,
                    const Poly& r0, unsigned word_cap);

struct FreenessReport {
  bool free = false;
  std::size_t words = 0;
  /// Two reduced words with the same value, when a relation is found.
  std::optional<std::pair<std::string, std::string>> relation;
};

/// Evaluates every reduced word of length <= 2k in gens and their inverses
/// and reports whether all values are distinct.
FreenessReport freeness_certificate(const std::vector<RatMatrix>& gens, unsigned k);

void to_json(nlohmann::json& j, const TransporterReport& r);
void to_json(nlohmann::json& j, const IntersectionReport& r);
void to_json(nlohmann::json& j, const ProductFormReport& r);
void to_json(nlohmann::json& j, const FreenessReport& r);

}  // namespace ffexp
