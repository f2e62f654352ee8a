#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/group.hpp"
#include "ffexp/measure.hpp"
#include "ffexp/subgroup.hpp"

namespace ffexp {

/// Factor orders pairwise distinct (the non-isomorphism check used here).
bool pairwise_distinct_orders(const ProductGroup& g);

/// A set is (D_0..D_{n-1})-regular when every level-k vertex of its prefix
/// tree (prefixes in factor order 0, 1, ...) has exactly D_k children.
struct RegularProfile {
  std::vector<std::uint64_t> D;
  std::vector<Id> A;
  double delta = 0;
  std::vector<std::uint64_t> factor_orders;
  /// |S| the profile was extracted from (|A| for check_regular).
  std::size_t source_size = 0;

  /// D_i = 1 or D_i > |G_i|^delta for every i.
  bool levels_ok() const;
  /// |A| > (prod |G_i|)^(-2 delta) |S|
  bool size_ok() const;
};

struct RegularityCheck {
  bool regular = false;
  std::optional<RegularProfile> profile;
  /// First prefix whose child count differs from the first vertex at its level.
  unsigned failure_level = 0;
  std::vector<Id> failure_prefix;
  std::uint64_t expected = 0, found = 0;
};

/// Throws std::invalid_argument on an empty set.
RegularityCheck check_regular(const ProductGroup& g, std::vector<Id> a);

enum class RegularizeMode {
  /// Largest regular subset among profiles with every D_i = 1 or > |G_i|^delta.
  Exact,
  /// Bottom-up dyadic pigeonholing on child counts.
  Dyadic
};

/// Regular subset of S. The result always passes check_regular (a failure
/// throws std::logic_error); levels_ok/size_ok report the two size guarantees.
RegularProfile regularize(const ProductGroup& g, std::vector<Id> s, double delta,
                          RegularizeMode mode = RegularizeMode::Exact);

struct ScaleSplit {
  std::vector<std::size_t> I_l, I_s;
  unsigned L = 1;
  /// Approximate-homomorphism defect, filled in by callers that compute it.
  double T = 0;
};

/// i in I_l iff D_i >= |G_i|^(1 - 1/(3L)).
ScaleSplit scale_split(const RegularProfile& profile, unsigned L);

/// pr_{I_l}(A A A) = G_{I_l}, computed exactly.
bool scales_without_room(const ProductGroup& g, const std::vector<Id>& a, const ScaleSplit& split);

/// Smallest L with G L^-1-quasi-random: ceil(log|G| / log d_min).
unsigned quasirandom_L(const FiniteGroup& g);
unsigned quasirandom_L(std::uint64_t order, std::uint64_t d_min);

struct GowersReport {
  unsigned L = 1;
  /// mean of log|A_i|, against (1 - 1/(3L)) log|G|.
  double mean_h0 = 0;
  double threshold = 0;
  bool hypothesis = false;
  std::size_t product_size = 0;
  double coverage = 0;
  bool covers = false;
  /// covers whenever the hypothesis holds.
  bool holds = true;
};

GowersReport gowers_check(const FiniteGroup& g, const std::vector<Id>& a1, const std::vector<Id>& a2,
                          const std::vector<Id>& a3, unsigned L);

/// sum of log|G_i| over i in I_s where pr_i(g) != pr_i(g').
double metric_d(const ProductGroup& g, Id x, Id y, const std::vector<std::size_t>& I_s);

/// max over the listed pairs of d(psi(xy), psi(x)psi(y)) and d(psi(x^-1), psi(x)^-1),
/// with d over every factor of `codomain`. Throws std::out_of_range when a
/// needed value is missing from the table.
double approx_hom_defect(const FiniteGroup& domain, const ProductGroup& codomain, const std::vector<std::optional<Id>>& psi,
                         const std::vector<std::pair<Id, Id>>& pairs);

struct ExceptionalReport {
  double p = 0, p_prime = 0;
  unsigned L = 1;
  /// max over lower-family cosets of nu(gH).
  double max_lower_coset_mass = 0;
  bool coset_hypothesis = false;
  bool p_prime_hypothesis = false;
  /// Every pair of distinct family members has H1 n H2 <=_L some lower member.
  bool intersection_hypothesis = false;
  bool hypotheses = false;
  /// tilde(nu) * nu (H) for each family member.
  std::vector<double> masses;
  std::vector<std::size_t> exceptional;
  double bound = 0;
  bool holds = true;
};

/// E = {H in family : tilde(nu) * nu (H) > p'}; |E| < sqrt(2/(L p p')) is
/// checked when the hypotheses verify.
ExceptionalReport exceptional_count(const Measure<double>& nu, const std::vector<SubgroupDesc>& lower,
                                    const std::vector<SubgroupDesc>& family, double p, double p_prime, unsigned L);

/// max over left cosets gH of |S n gH| / |S|.
double max_coset_mass(const FiniteGroup& g, const std::vector<Id>& s, const SubgroupDesc& h);

struct ConjugacyExpansion {
  std::size_t count = 0;
  std::size_t class_size = 0;
  double bound = 0;
  double max_coset_mass = 0;
  /// P_S(s C(g)) <= |Cl(g)|^-eps |G|^delta on every coset.
  bool hypothesis = false;
  bool holds = true;
};

ConjugacyExpansion conjugacy_expansion(const FiniteGroup& g, const std::vector<Id>& s, Id x, double eps, double delta);

/// Subgroup families for (V3) on one SL_2 factor: levels[0] = {Z},
/// levels[1] = tori, levels[2] = Borels and torus normalizers, each closed
/// under conjugation; subfield[j] = conjugates of one subfield model.
struct Sl2Families {
  std::vector<std::vector<SubgroupDesc>> levels;
  std::vector<std::vector<SubgroupDesc>> subfield;
  std::vector<SubgroupDesc> all() const;
};

Sl2Families sl2_families(std::shared_ptr<const GroupEnum> g);
/// Every conjugate of h, deduplicated, ordered by members.
std::vector<SubgroupDesc> conjugacy_class_of(const FiniteGroup& g, const SubgroupDesc& h);

struct VarjuParams {
  unsigned L = 1;
  double epsilon = 0;
  double delta = 0;
  unsigned m = 0;
  std::size_t m_prime = 0;
  /// delta differs from min(eps^5, 1)/(8L).
  bool non_canonical = false;
};

/// delta = min(eps^5, 1)/(8L); throws std::invalid_argument when m >= L or
/// m' > L log|G|.
VarjuParams varju_params(unsigned L, double eps, unsigned m, std::size_t m_prime, double log_order);

/// pr_factor^-1(h) inside a product, or h itself when factor is unset.
struct CosetFamilyMember {
  std::optional<std::size_t> factor;
  SubgroupDesc h;
};

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  double value = 0;
  double threshold = 0;
};

struct GrowthReport {
  std::size_t s_size = 0;
  std::uint64_t g_order = 0;
  std::size_t triple_size = 0;
  bool exact = true;
  /// 95% Wilson interval for |S S S| in sampling mode.
  double ci_low = 0, ci_high = 0;
  double exponent = 0;
  bool hypothesis = false;
  std::vector<HypothesisCheck> checks;
  std::uint64_t seed = 0;
};

/// |S S S| and the growth exponent log|SSS|/log|S| - 1, together with the
/// size and coset hypotheses. Throws BudgetExceeded when |S|^2 > budget; when
/// the translates SS s do not cover G within `budget` products the size is
/// estimated from `samples` exact membership tests (exact = false).
GrowthReport growth_experiment(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& s, double eps,
                               double delta, const std::vector<CosetFamilyMember>& families,
                               std::uint64_t seed = 1, std::uint64_t budget = 100'000'000,
                               std::size_t samples = 20000);

/// Product set X Y, as a sorted id list.
std::vector<Id> product_set(const FiniteGroup& g, const std::vector<Id>& x, const std::vector<Id>& y);

struct HelfgottReport {
  /// sizes[k-1] = |Pi_k S|
  std::vector<std::size_t> sizes;
  /// (k, lhs, rhs) for k = 4..k_max: (k-2)(log|Pi_3| - log|S|) >= log|Pi_k| - log|S|.
  std::vector<std::tuple<unsigned, double, double>> rows;
  bool holds = true;
};

HelfgottReport helfgott_chain(const FiniteGroup& g, const std::vector<Id>& s, unsigned k_max);

struct RenyiGainReport {
  unsigned m = 0;
  std::size_t tuples = 0;
  /// H_2(X_y) for each sampled y.
  std::vector<double> h2;
  double base_h2 = 0;
  double mean_gain = 0, min_gain = 0, max_gain = 0;
  /// H_inf(X) / log|G| and 1 - H_2(X) / log|G|.
  double alpha_prime = 0, alpha_double_prime = 0;
  bool initial_entropy = false;
  bool room_for_improvement = false;
  bool hypothesis = false;
};

/// X_i uniform on A (2^(m+1)+1 of them), Y_j uniform on B (2^(m+1)-1 of them);
/// for sampled y, H_2 of X_1 y_1 X_2 ... y_(N-1) X_N X_(N+1) exactly, N = 2^(m+1).
/// |G| <= 400, otherwise BudgetExceeded.
RenyiGainReport renyi_gain_experiment(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& a,
                                      const std::vector<Id>& b, unsigned m, std::size_t samples,
                                      std::mt19937_64& rng);

void to_json(nlohmann::json& j, const RegularProfile& r);
void to_json(nlohmann::json& j, const RegularityCheck& r);
void to_json(nlohmann::json& j, const ScaleSplit& r);
void to_json(nlohmann::json& j, const GowersReport& r);
void to_json(nlohmann::json& j, const ExceptionalReport& r);
void to_json(nlohmann::json& j, const ConjugacyExpansion& r);
void to_json(nlohmann::json& j, const VarjuParams& r);
void to_json(nlohmann::json& j, const HypothesisCheck& r);
void to_json(nlohmann::json& j, const GrowthReport& r);
void to_json(nlohmann::json& j, const HelfgottReport& r);
void to_json(nlohmann::json& j, const RenyiGainReport& r);

}  // namespace ffexp
