#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ffexp/classify.hpp"
#include "ffexp/sl2.hpp"
#include "ffexp/valuation.hpp"
#include "ffexp/verify.hpp"
#include "oracles.hpp"

using namespace ffexp;

namespace {

const FieldParams F7(7);

std::shared_ptr<const FiniteGroup> tab_sl2(std::int64_t p)
{
  const FieldParams F(p);
  auto g = classical_group(matrix_algebra(Poly(F, {0, 1})), Quotient::Linear);
  return std::make_shared<const TabulatedGroup>(TabulatedGroup::from(g));
}

}  // namespace

TEST_CASE("transporter over a degenerate extension")
{
  auto r = transporter_check(7, 1);
  CHECK(r.cosets == 7 * (49 + 1));
  CHECK(r.transporting == 1);
  CHECK(r.ambient_checked == oracle::sl2_order(7));
  CHECK(r.holds);
  CHECK_THROWS_AS(transporter_check(5, 2), std::invalid_argument);
  CHECK_THROWS_AS(transporter_check(9, 1), std::invalid_argument);
}

TEST_CASE("transporter for PSL_2(F_7) inside PGL_2(F_49)")
{
  auto r = transporter_check(7, 2);
  CHECK(r.cosets == 49 * (49 * 49 + 1));
  CHECK(r.transporting == 1);
  CHECK_FALSE(r.witness);
  CHECK(r.ambient_checked == 117600);
  CHECK(r.holds);
}

TEST_CASE("conjugate intersections of PGL_2(F_7) inside PGL_2(F_49)")
{
  auto r = conjugate_intersection_check(7, 1, 2);
  CHECK(r.checked == 117600 - 336);
  std::size_t total = 0;
  for (const auto& [tag, count] : r.tags) {
    total += count;
    CHECK(tag != "Unclassified");
  }
  CHECK(total == r.checked);
  CHECK(r.lagrange);
  CHECK(r.counterexamples.empty());
  CHECK(r.holds);
  CHECK_THROWS_AS(conjugate_intersection_check(7, 2, 2), std::invalid_argument);
}

TEST_CASE("product form constant from minimal indices")
{
  auto g7 = tab_sl2(7), g11 = tab_sl2(11);
  // PSL_2(7) acts on 7 points and PSL_2(11) on 11 points.
  CHECK(min_proper_index(*g7) == 7);
  CHECK(min_proper_index(*g11) == 11);
  ProductGroup g({g7, g11});
  double c = product_form_constant(g);
  CHECK(c == doctest::Approx(std::min(std::log(7.0) / std::log(336.0), std::log(11.0) / std::log(1320.0))));
}

TEST_CASE("product form on explicit and random subgroups")
{
  auto g7 = tab_sl2(7), g11 = tab_sl2(11);
  ProductGroup g({g7, g11});
  const double c = std::log(11.0) / std::log(1320.0);

  // G_1 + Borel of SL_2(F_11).
  auto a11 = matrix_algebra(Poly(FieldParams(11), {0, 1}));
  auto e11 = classical_group(a11, Quotient::Linear);
  std::vector<Id> borel;
  for (Id x = 0; x < e11.order(); ++x)
    if (e11.element(x)(1, 0) == 0)
      borel.push_back(x);
  REQUIRE(borel.size() == 110);
  std::vector<Id> h;
  for (Id b : borel)
    for (Id a = 0; a < 336; ++a)
      h.push_back(g.encode({a, b}));
  auto r = product_form(g, h, c);
  CHECK(r.factor_indices == std::vector<std::uint64_t>{1, 12});
  CHECK(r.index == 12);
  CHECK(r.exponent == doctest::Approx(1.0));
  CHECK(r.holds);

  std::vector<Id> all(g.order());
  for (Id x = 0; x < all.size(); ++x)
    all[x] = x;
  auto full = product_form(g, all, c);
  CHECK(full.index == 1);
  CHECK(full.holds);

  CHECK_THROWS_AS(product_form(g, {0, 1}, c), std::invalid_argument);

  std::mt19937_64 rng(3);
  std::set<std::size_t> sizes;
  for (int i = 0; i < 100; ++i) {
    auto s = sample_product_subgroup(g, rng);
    sizes.insert(s.size());
    CHECK(product_form(g, s, c).holds);
  }
  CHECK(sizes.size() > 5);
}

TEST_CASE("small lifts")
{
  Modulus l(Poly(F7, {-1, 1}));
  auto gens = standard_generators(F7);
  auto alg = matrix_algebra(l.poly());
  GroupEnum g = GroupEnum::generate(alg, reduce_all(gens, *alg), Quotient::Linear);
  const Poly r0(F7, {0, 1});

  std::vector<Id> all(g.order());
  for (Id x = 0; x < all.size(); ++x)
    all[x] = x;
  SubgroupDesc whole = subgroup_from_members(g, all);
  auto everything = small_lifts(g, whole, 0.0, gens, r0, 3);
  CHECK(everything.words_enumerated == 1 + 4 + 16 + 64);
  CHECK(everything.lifts.empty());

  std::vector<Id> borel;
  for (Id x = 0; x < g.order(); ++x)
    if (g.element(x)(1, 0) == 0)
      borel.push_back(x);
  SubgroupDesc b = subgroup_from_members(g, borel);
  const unsigned cap = 6;
  auto lifts = small_lifts(g, b, 0.3, gens, r0, cap);
  CHECK(lifts.height_bound == doctest::Approx(0.3 * std::log(8.0)));
  CHECK_FALSE(lifts.lifts.empty());

  // Independent recount: words enumerated as base-4 integers, reduced entrywise.
  const auto places = height_places(r0);
  std::set<std::vector<std::uint32_t>> expected;
  for (unsigned len = 0; len <= cap; ++len) {
    std::uint64_t total = 1;
    for (unsigned i = 0; i < len; ++i)
      total *= gens.size();
    for (std::uint64_t code = 0; code < total; ++code) {
      std::vector<std::uint32_t> w;
      RatMatrix m = RatMatrix::identity(F7, 2);
      std::uint64_t c = code;
      for (unsigned i = 0; i < len; ++i) {
        w.push_back(c % gens.size());
        c /= gens.size();
      }
      for (auto s : w)
        m = m * gens[s];
      Mat red = reduce_mod(m, *alg);
      if (red(1, 0) == 0 && matrix_height(m, places).log(7) < lifts.height_bound)
        expected.insert(w);
    }
  }
  std::set<std::vector<std::uint32_t>> got;
  for (const auto& x : lifts.lifts) {
    got.insert(x.word);
    CHECK(reduce_mod(x.matrix, *alg)(1, 0) == 0);
  }
  CHECK(got == expected);
  CHECK(got.size() == lifts.lifts.size());
}

TEST_CASE("freeness certificates")
{
  // Hyperbolic at v_infinity with distinct axes.
  auto a = parse_matrix(F7, "[[t,1],[-1,0]]");
  auto g = parse_matrix(F7, "[[2,1],[1,1]]");
  auto b = g * a * g.inverse();
  auto r = freeness_certificate({a, b}, 4);
  CHECK(r.free);
  CHECK(r.words == 1 + 4 * (6561 - 1) / 2);

  // Unipotent constants have order 7 in characteristic 7.
  auto u = freeness_certificate(parse_matrix_list(F7, "[[1,2],[0,1]];[[1,0],[2,1]]"), 4);
  CHECK_FALSE(u.free);
  REQUIRE(u.relation);

  CHECK_FALSE(freeness_certificate({RatMatrix::identity(F7, 2)}, 1).free);
  CHECK_FALSE(freeness_certificate({a, a}, 1).free);
}
