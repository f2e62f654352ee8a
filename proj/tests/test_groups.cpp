#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ffexp/sl2.hpp"
#include "oracles.hpp"

using namespace ffexp;

namespace {

const FieldParams F7(7);

Poly P(std::initializer_list<std::int64_t> c) { return Poly(F7, c); }

// Counts 2x2 matrices of determinant 1 over F_q by exhaustive enumeration of
// the ring elements.
std::uint64_t count_det_one(const QuotientRing& R)
{
  std::uint64_t count = 0;
  const Code N = R.size();
  for (Code a = 0; a < N; ++a)
    for (Code b = 0; b < N; ++b)
      for (Code c = 0; c < N; ++c)
        for (Code d = 0; d < N; ++d)
          count += R.sub(R.mul(a, d), R.mul(b, c)) == 1;
  return count;
}

}  // namespace

TEST_CASE("quotient ring arithmetic agrees with polynomial arithmetic")
{
  for (const Poly& f : {P({1, 0, 1}), P({-1, 1}) * P({-2, 1}), P({3, 1, 0, 1})}) {
    QuotientRing R(f);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) {
      Code a = rng() % R.size(), b = rng() % R.size();
      CHECK(R.mul(a, b) == R.from_poly(R.to_poly(a) * R.to_poly(b)));
      CHECK(R.add(a, b) == R.from_poly(R.to_poly(a) + R.to_poly(b)));
      CHECK(R.add(a, R.neg(a)) == 0);
      if (R.is_unit(a))
        CHECK(R.mul(a, R.inv(a)) == 1);
    }
  }
  QuotientRing F49(P({1, 0, 1}));
  CHECK(F49.is_field());
  CHECK(F49.size() == 49);
  Code g = F49.primitive_element();
  CHECK(F49.pow(g, 24) != 1);
  CHECK(F49.pow(g, 48) == 1);
  int in_f7 = 0;
  for (Code a = 0; a < 49; ++a)
    in_f7 += F49.in_subfield(a, 7);
  CHECK(in_f7 == 7);
}

TEST_CASE("field embedding is a ring homomorphism")
{
  QuotientRing small(P({1, 0, 1}));
  QuotientRing big(first_irreducible(F7, 4));
  FieldEmbedding phi(small, big);
  for (Code a = 0; a < 49; ++a)
    for (Code b = 0; b < 49; ++b) {
      CHECK(phi(small.mul(a, b)) == big.mul(phi(a), phi(b)));
      CHECK(phi(small.add(a, b)) == big.add(phi(a), phi(b)));
    }
  CHECK(phi.preimage(phi(17)) == 17);
}

TEST_CASE("reduce_mod")
{
  Modulus m(P({-1, 1}));
  auto alg = matrix_algebra(m.poly());
  Mat u = reduce_mod(parse_matrix(F7, "[[1,t],[0,1]]"), *alg);
  CHECK(u == alg->from_ints({1, 1, 0, 1}));
  CHECK(reduce_mod(RatMatrix::identity(F7, 2), *alg) == alg->identity());
  auto alg_t = matrix_algebra(P({0, 1}));
  CHECK_THROWS_AS(reduce_mod(parse_matrix(F7, "[[1,1/t],[0,1]]"), *alg_t), std::domain_error);
}

TEST_CASE("reduce_mod is a homomorphism on random pairs")
{
  std::mt19937_64 rng(9);
  auto gens = symmetrize(standard_generators(F7));
  gens.push_back(parse_matrix(F7, "[[t,1],[-1,0]]"));
  gens.push_back(parse_matrix(F7, "[[1/t,0],[0,t]]"));
  for (const Poly& f : {P({-1, 1}), P({1, 0, 1}), P({1, 0, 1}) * P({-1, 1})}) {
    auto alg = matrix_algebra(f);
    for (int trial = 0; trial < 1000; ++trial) {
      RatMatrix a = gens[rng() % gens.size()], b = gens[rng() % gens.size()];
      for (int k = 0; k < 3; ++k)
        a = a * gens[rng() % gens.size()];
      CHECK(alg->reduce(a * b) == alg->mul(alg->reduce(a), alg->reduce(b)));
    }
  }
}

TEST_CASE("matrix inverse and determinant")
{
  auto alg = matrix_algebra(P({1, 0, 1}), 3);
  std::mt19937_64 rng(2);
  int tested = 0;
  while (tested < 50) {
    Mat m = alg->zero();
    for (unsigned i = 0; i < 9; ++i)
      m.e[i] = rng() % 49;
    if (!alg->is_invertible(m))
      continue;
    CHECK(alg->mul(m, alg->inverse(m)) == alg->identity());
    Mat m2 = alg->mul(m, m);
    CHECK(alg->det(m2) == alg->ring().mul(alg->det(m), alg->det(m)));
    ++tested;
  }
  auto a2 = matrix_algebra(P({1, 0, 1}));
  Mat k = a2->from_ints({2, 3, 4, 5});
  CHECK(a2->decode(a2->encode(k)) == k);
}

TEST_CASE("generate_group orders")
{
  const FieldParams& F = F7;
  Modulus l(P({-1, 1}));
  GroupEnum g = generate_mod(classical_generators(F), l);
  CHECK(g.order() == 336);
  CHECK(g.order() == oracle::sl2_order(7));
  CHECK(g.order() == count_det_one(QuotientRing(l.poly())));
  CHECK(sl2_order(l) == 336);

  auto alg = matrix_algebra(l.poly());
  GroupEnum trivial = GroupEnum::generate(alg, {alg->identity()}, Quotient::Linear);
  CHECK(trivial.order() == 1);

  Modulus two(P({-1, 1}) * P({-2, 1}));
  // Constant generators land in the diagonal copy of SL_2(F_7).
  CHECK(generate_mod(classical_generators(F), two).order() == 336);
  CHECK(crt_group_order(classical_generators(F), two).order == 336);
  GroupEnum g2 = generate_mod(standard_generators(F), two);
  CHECK(g2.order() == 336 * 336);
  CHECK(sl2_order(two) == 336 * 336);
  CHECK(crt_group_order(standard_generators(F), two).order == 336 * 336);
}

TEST_CASE("sl2 order over a quadratic field matches enumeration")
{
  Modulus l(P({1, 0, 1}));
  GroupEnum g = generate_mod(standard_generators(F7), l);
  CHECK(g.order() == 117600);
  CHECK(sl2_order(l) == 49 * 2400);
  CHECK(crt_group_order(standard_generators(F7), l).order == 117600);
}

TEST_CASE("group laws of an enumeration")
{
  GroupEnum g = generate_mod(classical_generators(F7), Modulus(P({-3, 1})));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    Id a = rng() % g.order(), b = rng() % g.order(), c = rng() % g.order();
    CHECK(g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c)));
    CHECK(g.mul(a, g.inv(a)) == 0);
    CHECK(g.mul(0, a) == a);
  }
}

TEST_CASE("order is invariant under permuting and conjugating generators")
{
  Modulus l(P({1, 0, 1}));
  auto alg = matrix_algebra(l.poly());
  auto gens = reduce_all(standard_generators(F7), *alg);
  auto base = GroupEnum::generate(alg, gens, Quotient::Linear).order();
  std::reverse(gens.begin(), gens.end());
  CHECK(GroupEnum::generate(alg, gens, Quotient::Linear).order() == base);
  Mat c = alg->from_ints({2, 1, 1, 1});
  Mat ci = alg->inverse(c);
  for (auto& s : gens)
    s = alg->mul(alg->mul(c, s), ci);
  CHECK(GroupEnum::generate(alg, gens, Quotient::Linear).order() == base);
}

TEST_CASE("classical groups over fields")
{
  auto a7 = matrix_algebra(P({0, 1}));
  CHECK(classical_group(a7, Quotient::Linear).order() == 336);
  CHECK(classical_group(a7, Quotient::PlusMinus).order() == 168);
  CHECK(classical_group(a7, Quotient::Projective).order() == 336);
  const FieldParams F3(3);
  auto a9 = matrix_algebra(Poly(F3, {1, 0, 1}));
  CHECK(classical_group(a9, Quotient::Linear).order() == 720);
  CHECK(classical_group(a9, Quotient::Projective).order() == 720);
}

TEST_CASE("budget exceeded reports the partial size")
{
  auto alg = matrix_algebra(P({1, 0, 1}));
  try {
    GroupEnum::generate(alg, reduce_all(standard_generators(F7), *alg), Quotient::Linear, 1000);
    FAIL("expected budget error");
  } catch (const BudgetExceeded& e) {
    CHECK(e.reached > 1000);
  }
}

TEST_CASE("product and cyclic groups")
{
  auto z3 = std::make_shared<const TabulatedGroup>(TabulatedGroup::cyclic(3));
  auto z4 = std::make_shared<const TabulatedGroup>(TabulatedGroup::cyclic(4));
  ProductGroup g({z3, z4});
  CHECK(g.order() == 12);
  Id x = g.encode({1, 1});
  CHECK(g.element_order(x) == 12);
  CHECK(g.project(g.mul(x, x), 1) == 2);
  CHECK(g.decode(g.inv(x)) == std::vector<Id>{2, 3});
}
