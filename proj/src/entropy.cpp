#include "ffexp/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace ffexp {

EntropyReport entropy(const std::vector<double>& probs)
{
  EntropyReport r;
  double total = 0, sq = 0, mx = 0;
  std::size_t support = 0;
  for (double w : probs) {
    if (w < 0)
      throw std::invalid_argument("negative probability");
    if (w == 0)
      continue;
    ++support;
    total += w;
    sq += w * w;
    mx = std::max(mx, w);
    r.h -= w * std::log(w);
  }
  if (support == 0)
    throw std::invalid_argument("entropy of an empty distribution");
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("probabilities do not sum to 1");
  r.h0 = std::log(double(support));
  r.h2 = -std::log(sq);
  r.hinf = -std::log(mx);
  return r;
}

std::vector<double> JointLaw::marginal_x() const
{
  std::vector<double> m(rows(), 0.0);
  for (std::size_t x = 0; x < rows(); ++x)
    for (double w : p[x])
      m[x] += w;
  return m;
}

std::vector<double> JointLaw::marginal_y() const
{
  std::vector<double> m(cols(), 0.0);
  for (const auto& row : p)
    for (std::size_t y = 0; y < row.size(); ++y)
      m[y] += row[y];
  return m;
}

std::vector<double> JointLaw::flat() const
{
  std::vector<double> out;
  for (const auto& row : p)
    out.insert(out.end(), row.begin(), row.end());
  return out;
}

JointLaw JointLaw::transposed() const
{
  JointLaw t;
  t.p.assign(cols(), std::vector<double>(rows(), 0.0));
  for (std::size_t x = 0; x < rows(); ++x)
    for (std::size_t y = 0; y < cols(); ++y)
      t.p[y][x] = p[x][y];
  return t;
}

JointLaw joint_from_product(const Measure<double>& mu, const ProductGroup& g)
{
  if (g.num_factors() != 2)
    throw std::invalid_argument("joint law needs a product of two groups");
  if (mu.parent().hash() != g.hash())
    throw std::invalid_argument("measure does not live on this product");
  JointLaw j;
  j.p.assign(g.factor(0).order(), std::vector<double>(g.factor(1).order(), 0.0));
  mu.for_each([&](Id x, double w) { j.p[g.project(x, 0)][g.project(x, 1)] += w; });
  return j;
}

ConditionalEntropy conditional_entropy_x_given_y(const JointLaw& j)
{
  ConditionalEntropy c;
  auto py = j.marginal_y();
  for (std::size_t y = 0; y < j.cols(); ++y) {
    if (py[y] == 0)
      continue;
    std::vector<double> cond(j.rows());
    for (std::size_t x = 0; x < j.rows(); ++x)
      cond[x] = j.p[x][y] / py[y];
    auto e = entropy(cond);
    c.h += py[y] * e.h;
    c.h2 += py[y] * e.h2;
  }
  return c;
}

bool EntropyLawsReport::passed() const
{
  for (const auto& [law, n] : failures)
    if (n)
      return false;
  return true;
}

namespace {

std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng, bool allow_zeros)
{
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(n);
  double s = 0;
  for (auto& x : w) {
    x = allow_zeros && rng() % 4 == 0 ? 0.0 : ex(rng);
    s += x;
  }
  if (s == 0) {
    w[0] = 1;
    s = 1;
  }
  for (auto& x : w)
    x /= s;
  return w;
}

}  // namespace

EntropyLawsReport entropy_laws(std::shared_ptr<const FiniteGroup> group, std::size_t trials, std::size_t max_side,
                               std::mt19937_64& rng, double tolerance)
{
  EntropyLawsReport r;
  r.trials = trials;
  r.tolerance = tolerance;
  auto record = [&](const std::string& law, double slack) {
    auto it = r.min_slack.find(law);
    if (it == r.min_slack.end())
      r.min_slack[law] = slack;
    else
      it->second = std::min(it->second, slack);
    r.failures[law] += slack < -tolerance;
  };
  std::uniform_int_distribution<std::size_t> side(1, max_side);
  std::uniform_int_distribution<Id> elem(0, Id(group->order() - 1));
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t nx = side(rng), ny = side(rng);
    auto flat = random_simplex(nx * ny, rng, true);
    JointLaw j;
    j.p.assign(nx, std::vector<double>(ny));
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        j.p[x][y] = flat[x * ny + y];

    auto hxy = entropy(j.flat());
    auto hx = entropy(j.marginal_x());
    auto hy_given_x = conditional_entropy_x_given_y(j.transposed());
    auto hx_given_y = conditional_entropy_x_given_y(j);
    const double chain = hxy.h - hx.h - hy_given_x.h;
    record("chain_rule", -std::abs(chain));
    record("conditioning_decreases", hx.h - hx_given_y.h);
    for (const auto& e : {hxy, hx}) {
      record("ordering", e.h0 - e.h);
      record("ordering", e.h - e.h2);
      record("ordering", e.h2 - e.hinf);
      record("ordering", e.hinf);
    }

    // Coarsen Y through a random map f.
    const std::size_t nf = side(rng);
    std::vector<std::size_t> f(ny);
    for (auto& v : f)
      v = rng() % std::min(nf, ny);
    JointLaw coarse;
    coarse.p.assign(nx, std::vector<double>(ny, 0.0));
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        coarse.p[x][f[y]] += j.p[x][y];
    record("coarsening", conditional_entropy_x_given_y(coarse).h - hx_given_y.h);

    // Product of independent group-valued variables.
    auto random_measure = [&]() {
      const std::size_t k = std::min<std::size_t>(side(rng), group->order());
      auto w = random_simplex(k, rng, false);
      std::vector<Measure<double>::Entry> e;
      for (double x : w)
        e.emplace_back(elem(rng), x);
      return Measure<double>::from_entries(group, std::move(e));
    };
    auto mx = random_measure(), my = random_measure();
    auto exy = entropy(convolve(mx, my));
    auto ex = entropy(mx), ey = entropy(my);
    record("product_bound", exy.h0 - std::max(ex.h0, ey.h0));
    record("product_bound", exy.h - std::max(ex.h, ey.h));
    record("product_bound", exy.h2 - std::max(ex.h2, ey.h2));
    record("product_bound", exy.hinf - std::max(ex.hinf, ey.hinf));
  }
  return r;
}

void to_json(nlohmann::json& j, const EntropyReport& r)
{
  j = {{"h0", r.h0}, {"h", r.h}, {"h2", r.h2}, {"hinf", r.hinf}};
}

void to_json(nlohmann::json& j, const EntropyLawsReport& r)
{
  j = {{"trials", r.trials},
       {"tolerance", r.tolerance},
       {"failures", r.failures},
       {"min_slack", r.min_slack},
       {"passed", r.passed()}};
}

}  // namespace ffexp
