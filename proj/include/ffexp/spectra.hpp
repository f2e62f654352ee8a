#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/group.hpp"
#include "ffexp/modulus.hpp"
#include "ffexp/measure.hpp"
#include "ffexp/rational.hpp"

namespace ffexp {

/// Cay(G, Omega) with neighbours x -> w x. Omega is a multiset; repeated
/// generators give multi-edges.
class CayleyGraph {
 public:
  /// Throws std::invalid_argument when Omega is empty, contains ids outside G,
  /// or is not closed under inversion (with multiplicity).
  CayleyGraph(std::shared_ptr<const FiniteGroup> g, std::vector<Id> gens);

  std::size_t size() const { return group_->order(); }
  unsigned degree() const { return static_cast<unsigned>(gens_.size()); }
  const FiniteGroup& group() const { return *group_; }
  std::shared_ptr<const FiniteGroup> group_ptr() const { return group_; }
  const std::vector<Id>& gens() const { return gens_; }
  Id neighbor(Id x, std::size_t k) const { return nb_[k][x]; }

  /// out = T f, with (T f)(x) = (1/|Omega|) sum_w f(w x). Deterministic for any
  /// thread count.
  void apply(const std::vector<double>& f, std::vector<double>& out, unsigned threads = 1) const;
  /// Multiplicity of each edge x -> y, row-major |G| x |G| (|G| <= 5000).
  std::vector<std::uint32_t> adjacency_counts() const;

  bool connected() const;
  /// Two-colourable; false for disconnected graphs with an odd cycle anywhere.
  bool bipartite() const;

 private:
  std::shared_ptr<const FiniteGroup> group_;
  std::vector<Id> gens_;
  std::vector<std::vector<Id>> nb_;
};

CayleyGraph build_cayley(std::shared_ptr<const FiniteGroup> g, std::vector<Id> gens);

enum class SpectralMethod { PowerIteration, ExactDense };

std::string to_string(SpectralMethod m);
SpectralMethod spectral_method_from_string(const std::string& s);

struct SpectralOptions {
  SpectralMethod method = SpectralMethod::PowerIteration;
  double tolerance = 1e-8;
  unsigned max_iterations = 10000;
  std::uint64_t seed = 0x5eed;
  unsigned threads = 1;
};

constexpr std::size_t kExactDenseLimit = 5000;

struct SpectralReport {
  /// max |c| over the spectrum of T restricted to mean-zero functions.
  double lambda = 1;
  /// Largest eigenvalue on mean-zero functions when known.
  std::optional<double> lambda2;
  SpectralMethod method = SpectralMethod::PowerIteration;
  unsigned iterations = 0;
  double residual = 0;
  std::uint64_t seed = 0;
  bool converged = true;
  /// Bracket for lambda; collapses to lambda on convergence.
  double lower = 1, upper = 1;
  /// "disconnected", "bipartite" or empty.
  std::string certificate;
  std::vector<std::pair<unsigned, double>> trace_moments;
};

/// lambda(P_Omega; G). ExactDense throws std::invalid_argument above
/// kExactDenseLimit. PowerIteration works on T^2 with the constant vector
/// projected out; on hitting the cap it returns converged = false with the
/// bracket [lower, upper].
SpectralReport lambda(const CayleyGraph& graph, const SpectralOptions& opts = {});

/// All eigenvalues of T, ascending (|G| <= kExactDenseLimit).
std::vector<double> spectrum(const CayleyGraph& graph);

struct TraceMoment {
  unsigned l = 0;
  /// |G| P^(l)(e) = tr T^l
  double trace = 0;
  std::optional<Rational> exact_return;
  /// (tr T^l / d_min)^(1/l); only for even l > 0 with d_min given.
  std::optional<double> bound;
};

/// tr T^l from the l-step return probability. `exact` uses rational
/// arithmetic (small groups only).
TraceMoment trace_moment(const CayleyGraph& graph, unsigned l, std::optional<std::uint64_t> d_min = std::nullopt,
                         bool exact = false);

/// Degree-normalized Cheeger lower bound (1 - lambda_2)/2; falls back to
/// lambda when lambda_2 is unknown.
double expansion_bound(const SpectralReport& report);

struct CutWitness {
  std::size_t cuts = 0;
  bool exhaustive = false;
  /// min over tested B of e(B, V\B) / (deg * min(|B|, |V\B|)).
  double min_ratio = 0;
  std::vector<Id> argmin;
};

/// Edge expansion of one cut, normalized by degree.
double cut_ratio(const CayleyGraph& graph, const std::vector<char>& in_b);
/// Every cut for |G| <= 20; otherwise `samples` random sets, balls and walk
/// traces (|G| <= 2000).
CutWitness sampled_cuts(const CayleyGraph& graph, std::size_t samples, std::mt19937_64& rng);

struct ScanOptions {
  /// Rows with lambda >= 1 - gap_floor are flagged.
  double gap_floor = 0;
  std::size_t budget = kDefaultGroupCap;
  /// ExactDense for groups up to kExactDenseLimit when set; otherwise the
  /// method in `spectral` everywhere.
  bool prefer_exact = false;
  SpectralOptions spectral;
  unsigned threads = 1;
};

struct ScanRow {
  std::string f;
  unsigned degree = 0;
  std::uint64_t order = 0;
  double lambda = 1;
  double gap = 0;
  std::string method;
  double seconds = 0;
  double residual = 0;
  bool converged = true;
  bool skipped = false;
  bool flagged = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::optional<double> min_gap;
  std::optional<std::string> argmin_f;
};

/// lambda(pi_f<Omega>) for every admissible f, in enumeration order.
ScanResult family_scan(const std::vector<RatMatrix>& gens, const AdmissibleSpec& spec, const ScanOptions& opts = {});
/// Same over an explicit list of moduli.
ScanResult family_scan(const std::vector<RatMatrix>& gens, const std::vector<Modulus>& moduli,
                       const ScanOptions& opts = {});

/// Header f,deg_f,order,lambda,one_minus_lambda,method,seconds. Skipped rows
/// leave the numeric fields empty.
std::string to_csv(const ScanResult& r);

void to_json(nlohmann::json& j, const SpectralReport& r);
void to_json(nlohmann::json& j, const TraceMoment& r);
void to_json(nlohmann::json& j, const CutWitness& r);
void to_json(nlohmann::json& j, const ScanRow& r);
void to_json(nlohmann::json& j, const ScanResult& r);

}  // namespace ffexp
