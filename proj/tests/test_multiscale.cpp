#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "ffexp/multiscale.hpp"
#include "ffexp/sl2.hpp"
#include "ffexp/walks.hpp"

using namespace ffexp;

namespace {

std::shared_ptr<const GroupEnum> sl2_prime(std::int64_t p)
{
  const FieldParams F(p);
  return std::make_shared<const GroupEnum>(classical_group(matrix_algebra(Poly(F, {-1, 1})), Quotient::Linear));
}

std::shared_ptr<const FiniteGroup> tab(const FiniteGroup& g)
{
  return std::make_shared<const TabulatedGroup>(TabulatedGroup::from(g));
}

std::shared_ptr<const FiniteGroup> cyclic(std::uint32_t n)
{
  return std::make_shared<const TabulatedGroup>(TabulatedGroup::cyclic(n));
}

std::vector<Id> random_subset(std::size_t n, std::size_t k, std::mt19937_64& rng)
{
  std::vector<Id> all(n);
  std::iota(all.begin(), all.end(), Id(0));
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<Id> symmetrized(const FiniteGroup& g, std::vector<Id> s)
{
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    s.push_back(g.inv(s[i]));
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// Largest regular subset size by enumerating every admissible profile and
/// testing feasibility directly on coordinate tuples.
std::uint64_t brute_force_regular(const ProductGroup& g, const std::vector<Id>& s, double delta)
{
  const std::size_t n = g.num_factors();
  std::vector<std::vector<Id>> pts;
  for (Id x : s)
    pts.push_back(g.decode(x));
  std::vector<std::uint64_t> D(n, 1);
  std::function<bool(std::vector<Id>&, std::size_t)> feasible = [&](std::vector<Id>& prefix, std::size_t k) {
    if (k == n)
      return true;
    std::set<Id> next;
    for (const auto& p : pts)
      if (std::equal(prefix.begin(), prefix.end(), p.begin()))
        next.insert(p[k]);
    std::uint64_t ok = 0;
    for (Id c : next) {
      prefix.push_back(c);
      ok += feasible(prefix, k + 1);
      prefix.pop_back();
    }
    return ok >= D[k];
  };
  std::uint64_t best = 0;
  std::function<void(std::size_t)> sweep = [&](std::size_t k) {
    if (k == n) {
      std::vector<Id> prefix;
      if (feasible(prefix, 0)) {
        std::uint64_t prod = 1;
        for (auto d : D)
          prod *= d;
        best = std::max(best, prod);
      }
      return;
    }
    const auto order = g.factor(k).order();
    for (std::uint64_t d = 1; d <= order; ++d) {
      if (d != 1 && !(double(d) > std::pow(double(order), delta)))
        continue;
      D[k] = d;
      sweep(k + 1);
    }
  };
  sweep(0);
  return best;
}

}  // namespace

TEST_CASE("check_regular")
{
  ProductGroup g({cyclic(3), cyclic(4)});
  std::vector<Id> all(12);
  std::iota(all.begin(), all.end(), Id(0));
  auto full = check_regular(g, all);
  REQUIRE(full.regular);
  CHECK(full.profile->D == std::vector<std::uint64_t>{3, 4});

  // (a,x), (a,y), (b,x) with a=0, b=1, x=0, y=1.
  auto bad = check_regular(g, {g.encode({0, 0}), g.encode({0, 1}), g.encode({1, 0})});
  CHECK_FALSE(bad.regular);
  CHECK(bad.failure_level == 1);
  CHECK(bad.failure_prefix == std::vector<Id>{1});
  CHECK(bad.expected == 2);
  CHECK(bad.found == 1);

  ProductGroup g3({cyclic(3), cyclic(4), cyclic(5)});
  auto single = check_regular(g3, {g3.encode({2, 3, 4})});
  REQUIRE(single.regular);
  CHECK(single.profile->D == std::vector<std::uint64_t>{1, 1, 1});
  CHECK_THROWS_AS(check_regular(g3, {}), std::invalid_argument);
}

TEST_CASE("regularize")
{
  ProductGroup g({cyclic(3), cyclic(4), cyclic(5)});
  std::vector<Id> all(60);
  std::iota(all.begin(), all.end(), Id(0));
  auto full = regularize(g, all, 0.1);
  CHECK(full.A == all);
  CHECK(full.D == std::vector<std::uint64_t>{3, 4, 5});

  // A box B0 x B1 x B2 with |B_i| > |G_i|^delta is returned unchanged.
  std::vector<Id> box;
  for (Id a : {0, 2})
    for (Id b : {1, 2, 3})
      for (Id c : {0, 1, 4})
        box.push_back(g.encode({a, b, c}));
  std::sort(box.begin(), box.end());
  auto same = regularize(g, box, 0.2);
  CHECK(same.A == box);
  CHECK(same.D == std::vector<std::uint64_t>{2, 3, 3});

  CHECK_THROWS_AS(regularize(g, all, 0), std::invalid_argument);
  CHECK_THROWS_AS(regularize(g, all, 1), std::invalid_argument);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    const double delta = 0.05 + 0.05 * (t % 4);
    auto s = random_subset(60, 1 + rng() % 40, rng);
    auto r = regularize(g, s, delta);
    CHECK(check_regular(g, r.A).regular);
    CHECK(std::includes(s.begin(), s.end(), r.A.begin(), r.A.end()));
    CHECK(r.levels_ok());
    CHECK(r.A.size() == brute_force_regular(g, s, delta));
    auto d = regularize(g, s, delta, RegularizeMode::Dyadic);
    CHECK(check_regular(g, d.A).regular);
    CHECK(d.levels_ok());
    CHECK(d.A.size() <= r.A.size());
  }

  // Three factors of order 24.
  auto sl23 = tab(*sl2_prime(3));
  ProductGroup toy({sl23, sl23, sl23});
  for (double delta : {0.05, 0.1, 0.2}) {
    for (int t = 0; t < 10; ++t) {
      auto s = random_subset(toy.order(), 500, rng);
      auto r = regularize(toy, s, delta);
      CHECK(check_regular(toy, r.A).regular);
      CHECK(r.levels_ok());
      CHECK(r.size_ok());
    }
  }
}

TEST_CASE("scale split")
{
  RegularProfile p;
  p.factor_orders = {336, 117600};
  p.D = {336, 117600};
  CHECK(scale_split(p, 6).I_l == std::vector<std::size_t>{0, 1});
  p.D = {1, 1};
  CHECK(scale_split(p, 6).I_s == std::vector<std::size_t>{0, 1});
  // 336^(17/18) = 243.21..., 117600^(17/18) = 61477.76...
  p.D = {244, 61477};
  auto s = scale_split(p, 6);
  CHECK(s.I_l == std::vector<std::size_t>{0});
  CHECK(s.I_s == std::vector<std::size_t>{1});
  p.D = {243, 61478};
  s = scale_split(p, 6);
  CHECK(s.I_l == std::vector<std::size_t>{1});
  CHECK(s.I_s == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(scale_split(p, 0), std::invalid_argument);
}

TEST_CASE("quasi-randomness exponent and Gowers products")
{
  auto g7 = sl2_prime(7);
  auto g5 = sl2_prime(5);
  CHECK(quasirandom_L(*g7) == 6);
  CHECK(quasirandom_L(*g5) == 7);
  CHECK(quasirandom_L(336, 3) == 6);
  CHECK_THROWS_AS(quasirandom_L(10, 1), std::invalid_argument);

  std::vector<Id> all(336);
  std::iota(all.begin(), all.end(), Id(0));
  auto full = gowers_check(*g7, all, all, all, 6);
  CHECK(full.hypothesis);
  CHECK(full.covers);

  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    auto r = gowers_check(*g7, random_subset(336, 300, rng), random_subset(336, 300, rng),
                          random_subset(336, 300, rng), 6);
    CHECK(r.hypothesis);
    CHECK(r.covers);
    CHECK(r.holds);
  }
  std::vector<Id> borel;
  for (Id x = 0; x < g7->order(); ++x)
    if (g7->element(x)(1, 0) == 0)
      borel.push_back(x);
  auto b = gowers_check(*g7, borel, borel, borel, 6);
  CHECK_FALSE(b.hypothesis);
  CHECK(b.product_size == 42);
  CHECK_FALSE(b.covers);
  CHECK(b.holds);

  // SL_2(F_5): L = 7 and sets above 120^(20/21).
  for (int t = 0; t < 20; ++t) {
    auto r = gowers_check(*g5, random_subset(120, 100, rng), random_subset(120, 100, rng),
                          random_subset(120, 100, rng), 7);
    CHECK(r.hypothesis);
    CHECK(r.holds);
  }
}

TEST_CASE("scales with no room for improvement")
{
  auto g5 = tab(*sl2_prime(5));
  auto g7 = tab(*sl2_prime(7));
  ProductGroup g({g5, g7});
  std::mt19937_64 rng(23);
  for (int t = 0; t < 5; ++t) {
    std::vector<Id> a;
    for (Id x : random_subset(120, 100, rng))
      for (Id y : random_subset(336, 260, rng))
        a.push_back(g.encode({x, y}));
    auto c = check_regular(g, a);
    REQUIRE(c.regular);
    auto split = scale_split(*c.profile, 7);
    CHECK(split.I_l == std::vector<std::size_t>{0, 1});
    CHECK(scales_without_room(g, a, split));
  }
}

TEST_CASE("metric and approximate homomorphisms")
{
  auto g5 = tab(*sl2_prime(5));
  ProductGroup g({g5, cyclic(7), cyclic(11)});
  std::vector<std::size_t> is{0, 1, 2};
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<Id> pick(0, Id(g.order() - 1));
  for (int t = 0; t < 300; ++t) {
    Id x = pick(rng), y = pick(rng), z = pick(rng), h = pick(rng);
    CHECK(metric_d(g, x, x, is) == 0);
    CHECK(metric_d(g, x, y, is) == metric_d(g, y, x, is));
    CHECK(metric_d(g, x, z, is) <= metric_d(g, x, y, is) + metric_d(g, y, z, is) + 1e-12);
    CHECK(metric_d(g, g.mul(h, x), g.mul(h, y), is) == doctest::Approx(metric_d(g, x, y, is)));
    CHECK(metric_d(g, g.mul(x, h), g.mul(y, h), is) == doctest::Approx(metric_d(g, x, y, is)));
  }
  CHECK(metric_d(g, g.encode({0, 1, 0}), g.encode({0, 2, 3}), {1}) == doctest::Approx(std::log(7.0)));

  ProductGroup codom({g5, cyclic(7)});
  std::vector<std::optional<Id>> psi(120);
  for (Id x = 0; x < 120; ++x)
    psi[x] = codom.encode({x, 0});
  std::vector<std::pair<Id, Id>> pairs;
  for (Id x = 0; x < 120; x += 7)
    for (Id y = 0; y < 120; y += 5)
      pairs.emplace_back(x, y);
  CHECK(approx_hom_defect(*g5, codom, psi, pairs) == 0);
  psi[7] = codom.encode({7, 3});
  CHECK(approx_hom_defect(*g5, codom, psi, pairs) == doctest::Approx(std::log(7.0)));
  psi[35].reset();
  CHECK_THROWS_AS(approx_hom_defect(*g5, codom, psi, pairs), std::out_of_range);
}

TEST_CASE("subgroup families")
{
  auto g = sl2_prime(7);
  auto f = sl2_families(g);
  REQUIRE(f.levels.size() == 3);
  CHECK(f.levels[0].size() == 1);
  CHECK(f.levels[0][0].order() == 2);
  // Conjugacy class sizes |G| / |N_G(H)|.
  std::size_t split = 0, nonsplit = 0;
  for (const auto& h : f.levels[1]) {
    split += h.order() == 6;
    nonsplit += h.order() == 8;
  }
  CHECK(split == 336 / 12);
  CHECK(nonsplit == 336 / 16);
  std::size_t borel = 0, nsplit = 0, nnonsplit = 0;
  for (const auto& h : f.levels[2]) {
    borel += h.order() == 42;
    nsplit += h.order() == 12;
    nnonsplit += h.order() == 16;
  }
  CHECK(borel == 8);
  CHECK(nsplit == 28);
  CHECK(nnonsplit == 21);
  CHECK(f.subfield.empty());
  for (const auto& h : f.all())
    CHECK(is_subgroup(*g, h.members));

  auto v = varju_params(6, 0.5, 2, 0, std::log(336.0));
  CHECK(v.delta == doctest::Approx(std::pow(0.5, 5) / 48));
  CHECK(varju_params(6, 2.0, 2, 0, 1).delta == doctest::Approx(1.0 / 48));
  CHECK_THROWS_AS(varju_params(2, 0.5, 2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(varju_params(2, 0.5, 1, 100, 1), std::invalid_argument);
}

TEST_CASE("exceptional subgroups")
{
  auto g = sl2_prime(7);
  auto f = sl2_families(g);
  std::vector<SubgroupDesc> borels;
  for (const auto& h : f.levels[2])
    if (h.order() == 42)
      borels.push_back(h);
  std::vector<Id> all(336);
  std::iota(all.begin(), all.end(), Id(0));
  auto uniform = Measure<double>::uniform(g, all);

  auto r = exceptional_count(uniform, f.levels[0], borels, 0.01, 0.35, 6);
  CHECK(r.hypotheses);
  for (double m : r.masses)
    CHECK(m == doctest::Approx(1.0 / 8));
  CHECK(r.exceptional.empty());
  CHECK(r.holds);

  auto low = exceptional_count(uniform, f.levels[0], borels, 0.01, 0.1, 6);
  CHECK_FALSE(low.p_prime_hypothesis);
  CHECK(low.exceptional.size() == 8);

  CHECK(exceptional_count(uniform, f.levels[0], {}, 1e-4, 0.1, 6).bound ==
        doctest::Approx(std::sqrt(2 / (6 * 1e-4 * 0.1))));
  CHECK(exceptional_count(uniform, f.levels[0], {}, 0.01, 0.5, 6).exceptional.empty());

  auto g5 = sl2_prime(5);
  auto f5 = sl2_families(g5);
  std::vector<SubgroupDesc> b5;
  for (const auto& h : f5.levels[2])
    if (h.order() == 20)
      b5.push_back(h);
  CHECK(b5.size() == 6);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ex(0.5, 1.5);
  std::size_t verified = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<Measure<double>::Entry> e;
    for (Id x : random_subset(120, 60 + rng() % 61, rng))
      e.emplace_back(x, ex(rng));
    double total = 0;
    for (auto& [x, w] : e)
      total += w;
    for (auto& [x, w] : e)
      w /= total;
    auto nu = Measure<double>::from_entries(g5, e);
    const double p = 0.04 + 0.01 * (t % 4);
    const double pp = std::sqrt(2.0 * 7 * p) * 1.01;
    auto rep = exceptional_count(nu, f5.levels[0], b5, p, pp, 7);
    verified += rep.hypotheses;
    CHECK(rep.holds);
  }
  CHECK(verified > 0);
}

TEST_CASE("conjugacy expansion")
{
  auto g = sl2_prime(7);
  std::vector<Id> all(336);
  std::iota(all.begin(), all.end(), Id(0));
  const Id minus_one = g->id_of(g->algebra().scalar(g->ring().from_int(-1)));
  auto central = conjugacy_expansion(*g, all, minus_one, 0.5, 0.01);
  CHECK(central.class_size == 1);
  CHECK(central.count == 1);
  CHECK(central.bound <= 1);
  CHECK(central.holds);

  std::size_t count = 0;
  auto classes = conjugacy_classes(*g, &count);
  for (Id x : {Id(3), Id(50), Id(200)}) {
    auto r = conjugacy_expansion(*g, all, x, 0.5, 0.01);
    CHECK(r.count == std::size_t(std::count(classes.begin(), classes.end(), classes[x])));
    CHECK(r.count == r.class_size);
    CHECK(r.holds);
  }
  std::mt19937_64 rng(37);
  for (int t = 0; t < 10; ++t) {
    auto s = random_subset(336, 67, rng);
    Id x = 1 + rng() % 335;
    auto r = conjugacy_expansion(*g, s, x, 0.3, 0.05);
    CHECK(r.count <= r.class_size);
    CHECK(r.holds);
  }
}

TEST_CASE("growth experiments and Helfgott chaining")
{
  auto g7e = sl2_prime(7);
  auto g7 = tab(*g7e);
  auto f7 = sl2_families(g7e);
  std::vector<CosetFamilyMember> fam7;
  for (const auto& h : f7.all())
    fam7.push_back({std::nullopt, h});

  std::vector<Id> borel;
  for (Id x = 0; x < g7e->order(); ++x)
    if (g7e->element(x)(1, 0) == 0)
      borel.push_back(x);
  auto sub = growth_experiment(g7, borel, 0.1, 0.01, fam7);
  CHECK_FALSE(sub.hypothesis);
  CHECK(sub.triple_size == 42);
  CHECK(sub.exponent == doctest::Approx(0.0));

  std::vector<Id> all(336);
  std::iota(all.begin(), all.end(), Id(0));
  auto whole = growth_experiment(g7, all, 0.1, 0.01, fam7);
  CHECK_FALSE(whole.hypothesis);
  CHECK_FALSE(whole.checks[1].passed);

  auto g11e = sl2_prime(11);
  auto f11 = sl2_families(g11e);
  auto prod = std::make_shared<const ProductGroup>(
      std::vector<std::shared_ptr<const FiniteGroup>>{g7, tab(*g11e)});
  std::vector<CosetFamilyMember> fam;
  for (const auto& h : f7.all())
    fam.push_back({0, h});
  for (const auto& h : f11.all())
    fam.push_back({1, h});
  std::mt19937_64 rng(41);
  std::size_t passing = 0;
  for (int t = 0; t < 2; ++t) {
    auto s = symmetrized(*prod, random_subset(prod->order(), 1000, rng));
    auto r = growth_experiment(prod, s, 0.1, std::pow(0.1, 5) / 48, fam, 7);
    CHECK(r.exact);
    if (r.hypothesis) {
      ++passing;
      CHECK(r.exponent > 0);
    }
  }
  CHECK(passing > 0);

  auto small = symmetrized(*prod, random_subset(prod->order(), 300, rng));
  CHECK_THROWS_AS(growth_experiment(prod, small, 0.1, 0.0, fam, 9, 1000), BudgetExceeded);
  auto sampled = growth_experiment(prod, small, 0.1, 0.0, fam, 9, 500'000, 4000);
  CHECK_FALSE(sampled.exact);
  CHECK(sampled.ci_low <= double(sampled.triple_size));
  CHECK(double(sampled.triple_size) <= sampled.ci_high);
  nlohmann::json j = sampled;
  CHECK(j.contains("hypothesis_checks"));

  auto g5 = tab(*sl2_prime(5));
  for (int t = 0; t < 30; ++t) {
    auto s = symmetrized(*g5, random_subset(120, 2 + rng() % 12, rng));
    auto h = helfgott_chain(*g5, s, 6);
    CHECK(h.holds);
    CHECK(h.sizes.size() == 6);
    CHECK(h.sizes[2] == product_set(*g5, product_set(*g5, s, s), s).size());
  }
}

TEST_CASE("Renyi gain experiment")
{
  auto g5 = tab(*sl2_prime(5));
  std::vector<Id> all(120);
  std::iota(all.begin(), all.end(), Id(0));
  std::mt19937_64 rng(43);
  auto full = renyi_gain_experiment(g5, all, random_subset(120, 60, rng), 1, 5, rng);
  CHECK_FALSE(full.room_for_improvement);
  CHECK_FALSE(full.hypothesis);
  CHECK(std::abs(full.mean_gain) < 1e-9);

  auto point = renyi_gain_experiment(g5, {17}, random_subset(120, 60, rng), 1, 5, rng);
  CHECK_FALSE(point.initial_entropy);

  auto r = renyi_gain_experiment(g5, random_subset(120, 60, rng), random_subset(120, 60, rng), 1, 30, rng);
  CHECK(r.hypothesis);
  CHECK(r.h2.size() == 30);
  CHECK(r.mean_gain > 0);
  for (double h : r.h2)
    CHECK(h <= std::log(120.0) + 1e-9);

  auto big = tab(*sl2_prime(11));
  CHECK_THROWS_AS(renyi_gain_experiment(big, {1, 2}, {3}, 1, 1, rng), BudgetExceeded);
}
