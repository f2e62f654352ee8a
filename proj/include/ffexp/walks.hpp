#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/measure.hpp"
#include "ffexp/subgroup.hpp"

namespace ffexp {

/// Simple random walk on the free group with |Omega'| = 2M.
struct KestenReport {
  unsigned M = 0;
  unsigned l = 0;
  /// ((2M-1)/M^2)^l
  double bound = 0;
  /// Number of reduced words of length exactly l (1 for l = 0).
  std::uint64_t sphere = 0;
  /// P_l(0): return probability after 2l steps, exact.
  Rational exact_return;
};

/// Throws std::invalid_argument when M < 2.
KestenReport kesten(unsigned M, unsigned l);
/// Return probability after exactly `steps` steps on the 2M-regular tree.
Rational walk_return(unsigned M, unsigned steps);

struct DiophantineReport {
  bool holds = true;
  double alpha = 0, beta = 0;
  std::size_t subgroups_checked = 0;
  std::size_t cosets_checked = 0;
  /// min over checked cosets of log P(gH) / -log[G:H]; +inf if none.
  double worst_ratio = 0;
  std::optional<std::size_t> worst_subgroup;
  std::optional<Id> worst_coset_rep;
};

/// Checks P(X in gH) <= [G:H]^-beta for every listed H with |H| >= |G|^alpha
/// (H = G excluded) and every left coset gH.
DiophantineReport diophantine_check(const Measure<double>& mu, double alpha, double beta,
                                    const std::vector<SubgroupDesc>& subgroups);

struct FlatteningStep {
  unsigned m = 0;
  /// ||mu^(2^m)||_2
  double l2 = 0;
  /// (1/K) ||mu^(2^m)||_2; a flag is raised when ||mu^(2^(m+1))||_2 exceeds it.
  double bound = 0;
  double next_l2 = 0;
  bool flag = false;
  /// Candidate approximate subgroup from the level sets of tilde(mu) * mu.
  std::size_t a_size = 0;
  /// |AAA| / |A|; NaN when not computed.
  double tripling = 0;
  double min_mass_times_size = 0;
};

std::vector<FlatteningStep> flattening_monitor(const Measure<double>& mu0, unsigned m_max, double K);

struct EscapeSample {
  unsigned l = 0;
  double prob = 0;
  /// max over cosets of P^(l)(gH)^2 and P^(2l)(H).
  double max_coset_sq = 0;
  double prob_double = 0;
};

struct EscapeProbe {
  std::uint64_t index = 1;
  std::vector<EscapeSample> samples;
  double fitted_exponent = 0;
  /// P^(l)(gH)^2 <= P^(2l)(H) at every sample.
  bool cauchy_schwarz = true;
  /// P^(l)(H) non-increasing along the even sampled l.
  bool even_monotone = true;
  /// |H| / |G|
  double limit = 0;
};

/// Exact (binary64) probabilities P^(l)(H) for the walk driven by uniform
/// steps over `steps` (ids in g, repeats allowed). l_list strictly increasing.
EscapeProbe escape_probe(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& steps, const SubgroupDesc& h,
                         const std::vector<unsigned>& l_list);

struct QuasiRandomReport {
  std::vector<std::uint64_t> degrees;
  std::uint64_t d_min = 1;
  double c = 0;
  /// Sum of squared degrees equals |G|.
  bool sum_of_squares_ok = false;
  std::string method;
};

/// Character degrees from the class algebra (|G| <= 1e5). Larger groups use
/// the SL_2 closed form (q-1)/2 when sl2_q is given; otherwise BudgetExceeded.
QuasiRandomReport quasirandomness(const FiniteGroup& g, std::optional<std::uint64_t> sl2_q = std::nullopt);

/// Conjugacy class index of each element, classes numbered by smallest member.
std::vector<std::uint32_t> conjugacy_classes(const FiniteGroup& g, std::size_t* count = nullptr);

void to_json(nlohmann::json& j, const KestenReport& r);
void to_json(nlohmann::json& j, const DiophantineReport& r);
void to_json(nlohmann::json& j, const FlatteningStep& r);
void to_json(nlohmann::json& j, const EscapeProbe& r);
void to_json(nlohmann::json& j, const QuasiRandomReport& r);

}  // namespace ffexp
