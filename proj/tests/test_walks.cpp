#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "ffexp/entropy.hpp"
#include "ffexp/sl2.hpp"
#include "ffexp/verify.hpp"
#include "ffexp/walks.hpp"
#include "oracles.hpp"

using namespace ffexp;

namespace {

std::shared_ptr<const GroupEnum> sl2_prime(std::int64_t p)
{
  // Modulus t - 1, so the standard generators reduce to the classical ones.
  const FieldParams F(p);
  return std::make_shared<const GroupEnum>(classical_group(matrix_algebra(Poly(F, {-1, 1})), Quotient::Linear));
}

std::vector<Id> standard_steps(const GroupEnum& g)
{
  std::vector<Id> ids;
  for (const Mat& m : reduce_all(standard_generators(g.ring().field()), g.algebra()))
    ids.push_back(g.id_of(m));
  return ids;
}

std::vector<Id> borel_of(const GroupEnum& g)
{
  std::vector<Id> b;
  for (Id x = 0; x < g.order(); ++x)
    if (g.element(x)(1, 0) == 0)
      b.push_back(x);
  return b;
}

}  // namespace

TEST_CASE("convolution basics")
{
  auto g = sl2_prime(7);
  auto steps = standard_steps(*g);
  auto p = Measure<double>::uniform(g, steps);
  auto e = Measure<double>::point(g, 0);
  CHECK(convolve(e, p) == p);
  CHECK(convolve(p, e) == p);

  auto borel = borel_of(*g);
  auto ub = Measure<Rational>::uniform(g, borel);
  CHECK(convolve(ub, ub) == ub);

  // Row of the dense transition matrix squared.
  const std::size_t n = g->order();
  std::vector<double> t(n * n, 0.0);
  for (Id x = 0; x < n; ++x)
    for (Id s : steps)
      t[x * n + g->mul(x, s)] += 1.0 / steps.size();
  std::vector<double> row(n, 0.0);
  for (Id y = 0; y < n; ++y)
    for (Id z = 0; z < n; ++z)
      row[z] += t[y] * t[y * n + z];
  auto pp = convolve(p, p);
  for (Id z = 0; z < n; ++z)
    CHECK(pp.at(z) == doctest::Approx(row[z]).epsilon(1e-14));
  CHECK(pp.total() == doctest::Approx(1.0).epsilon(1e-12));

  StepOperator<double> op(p);
  CHECK(op.apply(p) == pp);

  auto other = sl2_prime(5);
  CHECK_THROWS_AS(convolve(p, Measure<double>::point(other, 0)), std::invalid_argument);
}

TEST_CASE("k-fold convolution agrees with sequential folding in rational mode")
{
  auto g = sl2_prime(5);
  auto p = Measure<Rational>::uniform(g, standard_steps(*g));
  CHECK(k_fold(p, 1) == p);
  CHECK(k_fold(p, 2) == convolve(p, p));
  Measure<Rational> seq = p;
  for (int l = 2; l <= 7; ++l) {
    seq = convolve(seq, p);
    CHECK(k_fold(p, l) == seq);
    CHECK(seq.total() == 1);
  }
  CHECK(k_fold(k_fold(p, 2), 2) == k_fold(p, 4));
}

TEST_CASE("tilde, pushforward and l2 norms")
{
  auto g = sl2_prime(7);
  auto p = Measure<Rational>::uniform(g, standard_steps(*g));
  CHECK(tilde(p) == p);
  std::vector<Id> eight{0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(l2_norm(Measure<double>::uniform(g, eight)) == doctest::Approx(1 / std::sqrt(8.0)));

  // Push forward to PSL_2(F_7) merges x and -x.
  auto alg = matrix_algebra(Poly(FieldParams(7), {-1, 1}));
  auto psl = std::make_shared<const GroupEnum>(classical_group(alg, Quotient::PlusMinus));
  auto q = k_fold(p, 3);
  auto pushed = pushforward<Rational>(q, psl, [&](Id x) { return psl->find(g->element(x)); });
  CHECK(pushed.total() == 1);
  CHECK(pushed.support_size() <= q.support_size());
  CHECK_THROWS_AS(pushforward<Rational>(q, psl, [](Id) { return std::optional<Id>(); }), std::invalid_argument);
}

TEST_CASE("Young inequality and monotone dyadic norms")
{
  auto g = sl2_prime(5);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Measure<double>::Entry> a, b;
    for (int i = 0; i < 6; ++i) {
      a.emplace_back(rng() % 120, double(rng() % 100 + 1));
      b.emplace_back(rng() % 120, double(rng() % 100 + 1));
    }
    auto norm = [](std::vector<Measure<double>::Entry> e) {
      double s = 0;
      for (auto& [x, w] : e)
        s += w;
      for (auto& [x, w] : e)
        w /= s;
      return e;
    };
    auto mu = Measure<double>::from_entries(g, norm(a));
    auto nu = Measure<double>::from_entries(g, norm(b));
    auto c = convolve(mu, nu);
    CHECK(c.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l2_norm(c) <= std::min(l2_norm(mu), l2_norm(nu)) + 1e-15);
  }
  auto mu = Measure<double>::uniform(g, standard_steps(*g));
  double last = l2_norm(mu);
  for (int m = 1; m <= 5; ++m) {
    mu = convolve(mu, mu);
    CHECK(l2_norm(mu) <= last + 1e-15);
    last = l2_norm(mu);
  }
}

TEST_CASE("return-to-identity identity is exact")
{
  auto g = sl2_prime(5);
  auto p = Measure<Rational>::uniform(g, standard_steps(*g));
  Measure<Rational> pl = p;
  for (int l = 1; l <= 8; ++l) {
    if (l > 1)
      pl = convolve(pl, p);
    CHECK(k_fold(p, 2 * l).at(0) == l2_squared(pl));
  }
}

TEST_CASE("entropy values")
{
  auto u = entropy(std::vector<double>(8, 0.125));
  for (double h : {u.h0, u.h, u.h2, u.hinf})
    CHECK(h == doctest::Approx(std::log(8.0)));
  auto pt = entropy(std::vector<double>{1.0});
  for (double h : {pt.h0, pt.h, pt.h2, pt.hinf})
    CHECK(h == doctest::Approx(0.0));
  auto r = entropy(std::vector<double>{0.5, 0.25, 0.25});
  CHECK(r.h == doctest::Approx(1.5 * std::log(2.0)));
  CHECK(r.h2 == doctest::Approx(-std::log(0.375)));
  CHECK(r.hinf == doctest::Approx(std::log(2.0)));
  CHECK(r.h0 == doctest::Approx(std::log(3.0)));

  // Independent X, Y and a constant coarsening.
  JointLaw j;
  std::vector<double> px{0.2, 0.3, 0.5}, py{0.6, 0.4};
  j.p.assign(3, std::vector<double>(2));
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y)
      j.p[x][y] = px[x] * py[y];
  CHECK(entropy(j.flat()).h == doctest::Approx(entropy(px).h + entropy(py).h));
  CHECK(conditional_entropy_x_given_y(j).h == doctest::Approx(entropy(px).h));
  JointLaw coarse;
  coarse.p.assign(3, std::vector<double>{0.0});
  for (int x = 0; x < 3; ++x)
    coarse.p[x][0] = px[x];
  CHECK(conditional_entropy_x_given_y(coarse).h == doctest::Approx(entropy(px).h));
}

TEST_CASE("entropy law battery")
{
  const FieldParams F3(3);
  auto g = std::make_shared<const GroupEnum>(classical_group(matrix_algebra(Poly(F3, {0, 1})), Quotient::Linear));
  std::mt19937_64 rng(17);
  auto r = entropy_laws(g, 1000, 8, rng);
  CHECK(r.passed());
  for (const auto& [law, n] : r.failures)
    CHECK_MESSAGE(n == 0, law);
  CHECK(r.failures.size() == 5);
}

TEST_CASE("Kesten bounds and free-group counts")
{
  CHECK(kesten(2, 2).sphere == 12);
  CHECK(kesten(2, 2).bound == doctest::Approx(0.5625));
  CHECK(walk_return(2, 2) == Rational(1, 4));
  CHECK(kesten(2, 0).exact_return == 1);
  CHECK(kesten(2, 2).exact_return == Rational(28, 256));
  CHECK_THROWS_AS(kesten(1, 2), std::invalid_argument);
  for (unsigned M = 2; M <= 3; ++M)
    for (unsigned s = 0; s <= 8; s += 2)
      CHECK(walk_return(M, s) == Rational(oracle::returning_walks_by_enumeration(M, s)) / Rational(oracle::ipow(2 * M, s)));
  for (unsigned M = 2; M <= 4; ++M) {
    for (unsigned r = 1; r <= 4; ++r)
      CHECK(kesten(M, 2 * r).sphere == oracle::reduced_words_by_dfs(M, 2 * r));
    for (unsigned l = 0; l <= 20; ++l) {
      auto k = kesten(M, l);
      CHECK(to_double(k.exact_return) <= k.bound);
      for (unsigned l2 = 0; l + l2 <= 20; ++l2)
        CHECK(k.exact_return * kesten(M, l2).exact_return <= kesten(M, l + l2).exact_return);
    }
  }
}

TEST_CASE("Diophantine checks")
{
  auto g = sl2_prime(7);
  auto borel = subgroup_from_members(*g, borel_of(*g));
  std::vector<Id> all(g->order());
  for (Id x = 0; x < all.size(); ++x)
    all[x] = x;
  auto center = subgroup_from_members(*g, {0, g->id_of(g->algebra().from_ints({6, 0, 0, 6}))});
  std::vector<SubgroupDesc> subs{borel, center};

  auto uniform = Measure<double>::uniform(g, all);
  auto r = diophantine_check(uniform, 0.0, 1.0, subs);
  CHECK(r.holds);
  CHECK(r.subgroups_checked == 2);
  CHECK(r.cosets_checked == 8 + 168);
  CHECK(r.worst_ratio == doctest::Approx(1.0));

  auto point = Measure<double>::point(g, 0);
  CHECK_FALSE(diophantine_check(point, 0.0, 0.5, subs).holds);

  // Only subgroups above |G|^alpha are looked at.
  CHECK(diophantine_check(point, 0.5, 0.5, subs).subgroups_checked == 1);

  auto walk = k_fold(Measure<double>::uniform(g, standard_steps(*g)), 10);
  auto w = diophantine_check(walk, 0.0, 0.5, {borel});
  CHECK(w.worst_ratio > 0.0);
  CHECK(w.holds == (w.worst_ratio >= 0.5));
}

TEST_CASE("flattening monitor")
{
  auto g = sl2_prime(7);
  auto borel = borel_of(*g);
  auto trace = flattening_monitor(Measure<double>::uniform(g, borel), 3, 2.0);
  REQUIRE(trace.size() == 4);
  for (const auto& s : trace) {
    CHECK(s.flag);
    CHECK(s.a_size == borel.size());
    CHECK(s.tripling == doctest::Approx(1.0));
    CHECK(s.min_mass_times_size == doctest::Approx(1.0));
  }
  std::vector<Id> all(g->order());
  for (Id x = 0; x < all.size(); ++x)
    all[x] = x;
  auto full = flattening_monitor(Measure<double>::uniform(g, all), 1, 2.0);
  CHECK(full[0].flag);
  CHECK(full[0].a_size == g->order());

  auto walk = flattening_monitor(Measure<double>::uniform(g, standard_steps(*g)), 6, 1.5);
  for (std::size_t m = 1; m < walk.size(); ++m)
    CHECK(walk[m].l2 <= walk[m - 1].l2 + 1e-15);
  CHECK(walk.back().l2 == doctest::Approx(1 / std::sqrt(336.0)).epsilon(0.05));
  CHECK_FALSE(walk[0].flag);
}

TEST_CASE("escape probes")
{
  const FieldParams F7(7);
  Modulus l(Poly(F7, {3, 1, 1}));
  auto alg = matrix_algebra(l.poly());
  auto a = parse_matrix(F7, "[[t,1],[-1,0]]");
  auto c = parse_matrix(F7, "[[2,1],[1,1]]");
  auto b = c * a * c.inverse();
  REQUIRE(freeness_certificate({a, b}, 4).free);
  auto omega = symmetrize({a, b});
  auto gens = reduce_all(omega, *alg);
  auto g = std::make_shared<const GroupEnum>(GroupEnum::generate(alg, gens, Quotient::Linear));
  REQUIRE(g->order() == 117600);
  std::vector<Id> steps;
  for (const Mat& m : gens)
    steps.push_back(g->id_of(m));

  std::vector<Id> all(g->order());
  for (Id x = 0; x < all.size(); ++x)
    all[x] = x;
  auto whole = subgroup_from_members(*g, all);
  auto r = escape_probe(g, steps, whole, {0, 2, 4});
  for (const auto& s : r.samples)
    CHECK(s.prob == doctest::Approx(1.0));

  SubgroupDesc trivial = make_subgroup(*g, {});
  auto t = escape_probe(g, steps, trivial, {0, 2, 4});
  for (const auto& s : t.samples)
    CHECK(s.prob == doctest::Approx(to_double(walk_return(2, s.l))).epsilon(1e-12));

  auto borel = subgroup_from_members(*g, borel_of(*g));
  auto e = escape_probe(g, steps, borel, {2, 4, 8, 12, 16, 20});
  CHECK(e.index == 50);
  CHECK(e.cauchy_schwarz);
  CHECK(e.even_monotone);
  CHECK(e.samples.back().prob <= 2.0 / 50);
  CHECK(e.samples.back().prob >= 0.5 / 50);
  CHECK_THROWS_AS(escape_probe(g, steps, borel, {4, 2}), std::invalid_argument);
}

TEST_CASE("quasirandomness from the class algebra")
{
  auto g7 = sl2_prime(7);
  auto r = quasirandomness(*g7);
  CHECK(r.d_min == 3);
  CHECK(r.sum_of_squares_ok);
  CHECK(r.degrees == std::vector<std::uint64_t>{1, 3, 3, 4, 4, 6, 6, 6, 7, 8, 8});
  CHECK(r.c == doctest::Approx(std::log(3.0) / std::log(336.0)));
  CHECK(r.c == doctest::Approx(0.1888).epsilon(1e-3));

  auto r5 = quasirandomness(*sl2_prime(5));
  CHECK(r5.d_min == 2);
  std::uint64_t s = 0;
  for (auto d : r5.degrees)
    s += d * d;
  CHECK(s == 120);

  auto z8 = TabulatedGroup::cyclic(8);
  auto ra = quasirandomness(z8);
  CHECK(ra.d_min == 1);
  CHECK(ra.c == 0.0);
  CHECK(ra.degrees.size() == 8);
}
