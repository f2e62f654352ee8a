#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/poly.hpp"

namespace ffexp {

/// A monic square-free modulus f with its distinct irreducible factors.
class Modulus {
 public:
  /// Factors f; throws std::invalid_argument when f is not monic square-free
  /// of positive degree.
  explicit Modulus(Poly f);

  const Poly& poly() const { return f_; }
  const FieldParams& field() const { return f_.field(); }
  unsigned degree() const { return f_.deg(); }
  const std::vector<Poly>& factors() const { return factors_; }
  /// N(l_i) = p^deg(l_i)
  std::uint64_t residue_size(std::size_t i) const;
  /// N(f) = p^deg(f)
  std::uint64_t norm() const;

  friend bool operator==(const Modulus& a, const Modulus& b) { return a.f_ == b.f_; }

 private:
  Poly f_;
  std::vector<Poly> factors_;
};

Modulus factor_squarefree(const Poly& f);

void to_json(nlohmann::json& j, const Modulus& m);

/// The admissible family S_{r0,c0}: square-free f whose irreducible factors
/// avoid r0, have degree > 1, pairwise distinct degrees, and whose degrees
/// have no prime divisor below c0.
struct AdmissibleSpec {
  Poly r0;
  std::uint64_t c0 = 1;
  unsigned max_total_degree = 0;
};

struct AdmissibilityVerdict {
  bool admissible = true;
  /// 0 when admissible, otherwise the first violated condition (1..4).
  int violated_condition = 0;
  std::string reason;
};

AdmissibilityVerdict is_admissible(const Modulus& f, const AdmissibleSpec& spec);

/// Every admissible f with deg f <= max_total_degree, ordered by (deg f, Poly order).
std::vector<Modulus> enumerate_admissible(const AdmissibleSpec& spec);

/// Chinese remainder isomorphism F_p[t]/<f> -> (+)_i F_p[t]/<l_i>.
class Crt {
 public:
  explicit Crt(const Modulus& m);

  const Modulus& modulus() const { return m_; }
  /// Throws std::invalid_argument when deg x >= deg f.
  std::vector<Poly> split(const Poly& x) const;
  Poly combine(const std::vector<Poly>& parts) const;

 private:
  Modulus m_;
  std::vector<Poly> idempotents_;
};

}  // namespace ffexp
