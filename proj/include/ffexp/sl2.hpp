#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ffexp/group.hpp"
#include "ffexp/modulus.hpp"
#include "ffexp/rational.hpp"

namespace ffexp {

/// {[[1,1],[0,1]]^{+-1}, [[1,0],[t,1]]^{+-1}} over F_p[t, 1/t].
std::vector<RatMatrix> standard_generators(const FieldParams& field);
/// {[[1,1],[0,1]]^{+-1}, [[1,0],[1,1]]^{+-1}} (constant matrices).
std::vector<RatMatrix> classical_generators(const FieldParams& field);
/// Adds inverses that are missing; keeps the original order first.
std::vector<RatMatrix> symmetrize(const std::vector<RatMatrix>& gens);

std::shared_ptr<const MatAlgebra> matrix_algebra(const Poly& f, unsigned n = 2);

/// Entrywise reduction mod f; throws std::domain_error when a denominator is
/// not invertible modulo f.
Mat reduce_mod(const RatMatrix& h, const MatAlgebra& algebra);
std::vector<Mat> reduce_all(const std::vector<RatMatrix>& hs, const MatAlgebra& algebra);

/// Enumerates <pi_f(gens)>.
GroupEnum generate_mod(const std::vector<RatMatrix>& gens, const Modulus& f, Quotient q = Quotient::Linear,
                       std::size_t cap = kDefaultGroupCap);

/// Generators of SL_2 over the field F_p[t]/<l>: the elementary matrices
/// with entries 1, t, ..., t^(d-1); plus diag(g, 1) for a primitive g when
/// `projective_general` is set.
std::vector<Mat> sl2_field_generators(const MatAlgebra& algebra, bool projective_general = false);

/// SL_2(F_Q) (Linear), PSL_2(F_Q) (PlusMinus) or PGL_2(F_Q) (Projective),
/// with F_Q = F_p[t]/<l>.
GroupEnum classical_group(std::shared_ptr<const MatAlgebra> algebra, Quotient q);

/// Order of <pi_f(gens)> computed through the chain of kernels of the CRT
/// projections (factors in increasing size). Exact; never enumerates the
/// whole group.
struct CrtOrderReport {
  std::uint64_t order = 0;
  std::vector<std::uint64_t> level_sizes;
};
CrtOrderReport crt_group_order(const std::vector<RatMatrix>& gens, const Modulus& f);

}  // namespace ffexp
