#include "ffexp/sl2.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace ffexp {

std::vector<RatMatrix> standard_generators(const FieldParams& field)
{
  return {parse_matrix(field, "[[1,1],[0,1]]"), parse_matrix(field, "[[1,-1],[0,1]]"),
          parse_matrix(field, "[[1,0],[t,1]]"), parse_matrix(field, "[[1,0],[-t,1]]")};
}

std::vector<RatMatrix> classical_generators(const FieldParams& field)
{
  return {parse_matrix(field, "[[1,1],[0,1]]"), parse_matrix(field, "[[1,-1],[0,1]]"),
          parse_matrix(field, "[[1,0],[1,1]]"), parse_matrix(field, "[[1,0],[-1,1]]")};
}

std::vector<RatMatrix> symmetrize(const std::vector<RatMatrix>& gens)
{
  std::vector<RatMatrix> out = gens;
  for (const auto& g : gens) {
    RatMatrix gi = g.inverse();
    if (std::find(out.begin(), out.end(), gi) == out.end())
      out.push_back(gi);
  }
  return out;
}

std::shared_ptr<const MatAlgebra> matrix_algebra(const Poly& f, unsigned n)
{
  return std::make_shared<const MatAlgebra>(std::make_shared<const QuotientRing>(f), n);
}

Mat reduce_mod(const RatMatrix& h, const MatAlgebra& algebra) { return algebra.reduce(h); }

std::vector<Mat> reduce_all(const std::vector<RatMatrix>& hs, const MatAlgebra& algebra)
{
  std::vector<Mat> out;
  out.reserve(hs.size());
  for (const auto& h : hs)
    out.push_back(algebra.reduce(h));
  return out;
}

GroupEnum generate_mod(const std::vector<RatMatrix>& gens, const Modulus& f, Quotient q, std::size_t cap)
{
  if (gens.empty())
    throw std::invalid_argument("empty generating set");
  auto alg = matrix_algebra(f.poly(), gens.front().dim());
  return GroupEnum::generate(alg, reduce_all(gens, *alg), q, cap);
}

std::vector<Mat> sl2_field_generators(const MatAlgebra& algebra, bool projective_general)
{
  const QuotientRing& R = algebra.ring();
  if (algebra.dim() != 2 || !R.is_field())
    throw std::invalid_argument("SL_2 generators need 2x2 matrices over a field");
  std::vector<Mat> gens;
  Code x = 1;
  for (unsigned i = 0; i < R.degree(); ++i) {
    Mat u = algebra.identity(), l = algebra.identity();
    u(0, 1) = x;
    l(1, 0) = x;
    gens.push_back(u);
    gens.push_back(l);
    x = R.mul(x, R.gen());
  }
  if (projective_general) {
    Mat d = algebra.identity();
    d(0, 0) = R.primitive_element();
    gens.push_back(d);
  }
  return gens;
}

GroupEnum classical_group(std::shared_ptr<const MatAlgebra> algebra, Quotient q)
{
  auto gens = sl2_field_generators(*algebra, q == Quotient::Projective);
  return GroupEnum::generate(std::move(algebra), gens, q);
}

namespace {

// Incremental closure of a set of matrices over a small ring, by keys.
struct Closure {
  const MatAlgebra* alg;
  std::vector<Mat> gens;
  std::vector<std::uint64_t> keys;
  std::unordered_set<std::uint64_t> members;

  void rebuild()
  {
    keys.clear();
    members.clear();
    std::uint64_t e = alg->encode(alg->identity());
    keys.push_back(e);
    members.insert(e);
    for (std::size_t head = 0; head < keys.size(); ++head) {
      Mat x = alg->decode(keys[head]);
      for (const auto& s : gens) {
        std::uint64_t k = alg->encode(alg->mul(x, s));
        if (members.insert(k).second)
          keys.push_back(k);
      }
    }
  }
  bool contains(const Mat& m) const { return members.count(alg->encode(m)) > 0; }
};

}  // namespace

CrtOrderReport crt_group_order(const std::vector<RatMatrix>& gens, const Modulus& f)
{
  if (gens.empty())
    throw std::invalid_argument("empty generating set");
  const unsigned n = gens.front().dim();
  auto big = matrix_algebra(f.poly(), n);
  const QuotientRing& R = big->ring();

  std::vector<std::size_t> order_of_levels(f.factors().size());
  std::iota(order_of_levels.begin(), order_of_levels.end(), 0);
  std::stable_sort(order_of_levels.begin(), order_of_levels.end(),
                   [&](std::size_t a, std::size_t b) { return f.residue_size(a) < f.residue_size(b); });

  std::vector<Mat> current = reduce_all(gens, *big);
  CrtOrderReport report;
  report.order = 1;
  for (std::size_t li = 0; li < order_of_levels.size(); ++li) {
    const Poly& l = f.factors()[order_of_levels[li]];
    auto small = matrix_algebra(l, n);
    std::vector<Code> proj(R.size());
    for (Code c = 0; c < R.size(); ++c)
      proj[c] = small->ring().from_poly(R.to_poly(c));
    auto project = [&](const Mat& m) {
      Mat r = small->zero();
      for (unsigned i = 0; i < n * n; ++i)
        r.e[i] = proj[m.e[i]];
      return r;
    };

    if (li + 1 == order_of_levels.size()) {
      // The CRT kernel is trivial, so only the image at this level remains.
      Closure c{small.get(), {}, {}, {}};
      c.rebuild();
      bool special = true;
      for (const auto& s : current)
        special = special && small->det(project(s)) == 1;
      const std::uint64_t Q = small->ring().size();
      const std::uint64_t sl_order = n == 2 ? Q * (Q * Q - 1) : 0;
      for (const auto& s : current) {
        if (special && sl_order && c.keys.size() == sl_order)
          break;
        Mat ps = project(s);
        if (c.contains(ps))
          continue;
        c.gens.push_back(ps);
        c.rebuild();
      }
      report.level_sizes.push_back(c.keys.size());
      report.order *= c.keys.size();
      break;
    }

    // Orbit of the identity under the level image, with transversal mod f.
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<Mat> transversal{big->identity()};
    index.emplace(small->encode(small->identity()), 0);
    std::vector<Mat> schreier;
    std::unordered_set<std::uint64_t> seen_schreier;
    const std::uint64_t id_key = big->encode(big->identity());
    for (std::size_t head = 0; head < transversal.size(); ++head) {
      for (const auto& s : current) {
        Mat y = big->mul(transversal[head], s);
        std::uint64_t k = small->encode(project(y));
        auto [it, inserted] = index.emplace(k, transversal.size());
        if (inserted) {
          transversal.push_back(y);
          continue;
        }
        Mat sg = big->mul(y, big->inverse(transversal[it->second]));
        std::uint64_t sk = big->encode(sg);
        if (sk != id_key && seen_schreier.insert(sk).second)
          schreier.push_back(sg);
        if (schreier.size() > 5'000'000)
          throw BudgetExceeded("too many Schreier generators", schreier.size());
      }
    }
    report.level_sizes.push_back(transversal.size());
    report.order *= transversal.size();
    current = std::move(schreier);
  }
  return report;
}

}  // namespace ffexp
