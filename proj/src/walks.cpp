#include "ffexp/walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ffexp {

void to_json(nlohmann::json& j, const Measure<double>& mu)
{
  nlohmann::json m = nlohmann::json::object();
  mu.for_each([&](Id x, double w) { m[std::to_string(x)] = w; });
  j = {{"parent", mu.parent().hash()}, {"masses", m}};
}

void to_json(nlohmann::json& j, const Measure<Rational>& mu)
{
  nlohmann::json m = nlohmann::json::object();
  mu.for_each([&](Id x, const Rational& w) { m[std::to_string(x)] = w.str(); });
  j = {{"parent", mu.parent().hash()}, {"masses", m}};
}

Rational walk_return(unsigned M, unsigned steps)
{
  if (M < 2)
    throw std::invalid_argument("free walk needs M >= 2");
  using boost::multiprecision::cpp_int;
  std::vector<cpp_int> ways(steps + 2, 0);
  ways[0] = 1;
  for (unsigned s = 0; s < steps; ++s) {
    std::vector<cpp_int> next(steps + 2, 0);
    next[1] += ways[0] * (2 * M);
    for (unsigned d = 1; d <= s; ++d) {
      next[d - 1] += ways[d];
      next[d + 1] += ways[d] * (2 * M - 1);
    }
    ways = std::move(next);
  }
  cpp_int total = 1;
  for (unsigned s = 0; s < steps; ++s)
    total *= 2 * M;
  return Rational(ways[0], total);
}

KestenReport kesten(unsigned M, unsigned l)
{
  if (M < 2)
    throw std::invalid_argument("free walk needs M >= 2");
  KestenReport r;
  r.M = M;
  r.l = l;
  r.bound = std::pow(double(2 * M - 1) / double(M * M), double(l));
  r.sphere = 1;
  if (l > 0) {
    r.sphere = 2 * M;
    for (unsigned i = 1; i < l; ++i)
      r.sphere *= 2 * M - 1;
  }
  r.exact_return = walk_return(M, 2 * l);
  return r;
}

namespace {

// Left coset label of every element; labels numbered in order of first appearance.
std::vector<std::uint32_t> left_cosets(const FiniteGroup& g, const std::vector<Id>& h, std::size_t& count)
{
  const std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> label(g.order(), none);
  count = 0;
  for (Id x = 0; x < g.order(); ++x) {
    if (label[x] != none)
      continue;
    for (Id y : h)
      label[g.mul(x, y)] = static_cast<std::uint32_t>(count);
    ++count;
  }
  return label;
}

}  // namespace

DiophantineReport diophantine_check(const Measure<double>& mu, double alpha, double beta,
                                    const std::vector<SubgroupDesc>& subgroups)
{
  const FiniteGroup& g = mu.parent();
  DiophantineReport r;
  r.alpha = alpha;
  r.beta = beta;
  r.worst_ratio = std::numeric_limits<double>::infinity();
  const double threshold = std::pow(double(g.order()), alpha);
  auto dense = mu.dense();
  for (std::size_t i = 0; i < subgroups.size(); ++i) {
    const auto& h = subgroups[i];
    if (h.order() >= g.order() || double(h.order()) < threshold)
      continue;
    ++r.subgroups_checked;
    std::size_t count = 0;
    auto label = left_cosets(g, h.members, count);
    std::vector<double> mass(count, 0.0);
    std::vector<Id> rep(count, 0);
    for (Id x = g.order(); x-- > 0;) {
      mass[label[x]] += dense[x];
      rep[label[x]] = x;
    }
    const double log_index = std::log(double(g.order()) / double(h.order()));
    for (std::size_t c = 0; c < count; ++c) {
      ++r.cosets_checked;
      if (mass[c] <= 0)
        continue;
      double ratio = -std::log(mass[c]) / log_index;
      if (ratio < r.worst_ratio) {
        r.worst_ratio = ratio;
        r.worst_subgroup = i;
        r.worst_coset_rep = rep[c];
      }
    }
  }
  r.holds = r.worst_ratio >= beta - 1e-12;
  return r;
}

namespace {

double tripling_ratio(const FiniteGroup& g, const std::vector<Id>& a)
{
  const double work = double(a.size()) * double(a.size()) + double(g.order()) * double(a.size());
  if (work > 2e8)
    return std::numeric_limits<double>::quiet_NaN();
  std::vector<char> aa(g.order(), 0), aaa(g.order(), 0);
  std::vector<Id> aa_list;
  for (Id x : a)
    for (Id y : a) {
      Id z = g.mul(x, y);
      if (!aa[z]) {
        aa[z] = 1;
        aa_list.push_back(z);
      }
    }
  std::size_t n = 0;
  for (Id x : aa_list)
    for (Id y : a) {
      Id z = g.mul(x, y);
      if (!aaa[z]) {
        aaa[z] = 1;
        ++n;
      }
    }
  return double(n) / double(a.size());
}

}  // namespace

std::vector<FlatteningStep> flattening_monitor(const Measure<double>& mu0, unsigned m_max, double K)
{
  if (K <= 0)
    throw std::invalid_argument("K must be positive");
  const FiniteGroup& g = mu0.parent();
  std::vector<FlatteningStep> trace;
  Measure<double> mu = mu0;
  for (unsigned m = 0; m <= m_max; ++m) {
    FlatteningStep s;
    s.m = m;
    s.l2 = l2_norm(mu);
    s.bound = s.l2 / K;
    Measure<double> next = convolve(mu, mu);
    s.next_l2 = l2_norm(next);
    s.flag = s.next_l2 > s.bound * (1 + 1e-12);
    s.tripling = std::numeric_limits<double>::quiet_NaN();
    if (s.flag) {
      auto w = convolve(tilde(mu), mu).dense();
      const double mx = *std::max_element(w.begin(), w.end());
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < 48; ++j) {
        const double hi = mx * std::ldexp(1.0, -j), lo = hi / 2;
        std::vector<Id> a;
        double mn = std::numeric_limits<double>::infinity();
        for (Id x = 0; x < w.size(); ++x)
          if (w[x] > lo && w[x] <= hi * (1 + 1e-12)) {
            a.push_back(x);
            mn = std::min(mn, w[x]);
          }
        if (a.empty())
          continue;
        double t = tripling_ratio(g, a);
        if (std::isnan(t) && s.a_size != 0)
          continue;
        if (s.a_size == 0 || t < best) {
          best = std::isnan(t) ? best : t;
          s.a_size = a.size();
          s.tripling = t;
          s.min_mass_times_size = mn * double(a.size());
        }
      }
    }
    trace.push_back(s);
    mu = std::move(next);
  }
  return trace;
}

EscapeProbe escape_probe(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& steps, const SubgroupDesc& h,
                         const std::vector<unsigned>& l_list)
{
  if (h.parent_hash != g->hash())
    throw std::invalid_argument("subgroup does not belong to this group");
  if (!std::is_sorted(l_list.begin(), l_list.end()) ||
      std::adjacent_find(l_list.begin(), l_list.end()) != l_list.end())
    throw std::invalid_argument("l values must be strictly increasing");
  EscapeProbe r;
  r.index = g->order() / h.order();
  r.limit = double(h.order()) / double(g->order());
  if (l_list.empty())
    return r;
  std::size_t ncos = 0;
  auto label = left_cosets(*g, h.members, ncos);
  StepOperator<double> op(Measure<double>::uniform(g, steps));
  Measure<double> mu = Measure<double>::point(g, FiniteGroup::identity());
  const unsigned l_max = l_list.back();
  std::vector<double> prob_h(2 * l_max + 1, 0.0);
  std::vector<double> max_sq(l_max + 1, 0.0);
  std::size_t next_sample = 0;
  for (unsigned s = 0; s <= 2 * l_max; ++s) {
    if (s > 0)
      mu = op.apply(mu);
    prob_h[s] = mu.mass(h.members);
    if (next_sample < l_list.size() && l_list[next_sample] == s) {
      std::vector<double> cos(ncos, 0.0);
      mu.for_each([&](Id x, double w) { cos[label[x]] += w; });
      double m = *std::max_element(cos.begin(), cos.end());
      max_sq[s] = m * m;
      ++next_sample;
    }
  }
  std::optional<double> last_even;
  for (unsigned l : l_list) {
    EscapeSample e{l, prob_h[l], max_sq[l], prob_h[2 * l]};
    if (e.max_coset_sq > e.prob_double * (1 + 1e-9) + 1e-15)
      r.cauchy_schwarz = false;
    if (l % 2 == 0) {
      if (last_even && e.prob > *last_even * (1 + 1e-9) + 1e-15)
        r.even_monotone = false;
      last_even = e.prob;
    }
    r.samples.push_back(e);
  }
  const double p_last = r.samples.back().prob;
  r.fitted_exponent = r.index > 1 && p_last > 0 ? -std::log(p_last) / std::log(double(r.index)) : 0.0;
  return r;
}

std::vector<std::uint32_t> conjugacy_classes(const FiniteGroup& g, std::size_t* count)
{
  std::vector<Id> gens;
  if (auto e = dynamic_cast<const GroupEnum*>(&g))
    gens = e->generator_ids();
  else {
    std::vector<Id> all(g.order());
    for (Id x = 0; x < all.size(); ++x)
      all[x] = x;
    gens = generating_set(g, all);
  }
  const std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> cls(g.order(), none);
  std::uint32_t n = 0;
  std::vector<Id> queue;
  for (Id x = 0; x < g.order(); ++x) {
    if (cls[x] != none)
      continue;
    cls[x] = n;
    queue.assign(1, x);
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (Id s : gens) {
        Id y = g.conj(s, queue[head]);
        if (cls[y] == none) {
          cls[y] = n;
          queue.push_back(y);
        }
      }
    ++n;
  }
  if (count)
    *count = n;
  return cls;
}

QuasiRandomReport quasirandomness(const FiniteGroup& g, std::optional<std::uint64_t> sl2_q)
{
  QuasiRandomReport r;
  const double order = double(g.order());
  if (g.order() > 100000) {
    if (!sl2_q)
      throw BudgetExceeded("character degrees need |G| <= 100000", g.order());
    r.method = "sl2_closed_form";
    r.d_min = (*sl2_q - 1) / 2;
    r.c = std::log(double(r.d_min)) / std::log(order);
    return r;
  }
  r.method = "class_algebra";
  std::size_t nc = 0;
  auto cls = conjugacy_classes(g, &nc);
  std::vector<double> size(nc, 0);
  std::vector<Id> rep(nc, 0);
  for (Id x = g.order(); x-- > 0;) {
    size[cls[x]] += 1;
    rep[cls[x]] = x;
  }
  // a[j](i, k) = #{(x, y) in C_i x C_j : xy = rep_k}.
  std::vector<Eigen::MatrixXd> a(nc, Eigen::MatrixXd::Zero(nc, nc));
  for (std::size_t k = 0; k < nc; ++k)
    for (Id x = 0; x < g.order(); ++x)
      a[cls[g.mul(g.inv(x), rep[k])]](cls[x], k) += 1;

  const std::size_t id_class = cls[FiniteGroup::identity()];
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nc, nc);
    for (std::size_t j = 0; j < nc; ++j)
      b += nd(rng) * a[j];
    Eigen::EigenSolver<Eigen::MatrixXd> es(b);
    if (es.info() != Eigen::Success)
      continue;
    std::vector<std::uint64_t> degrees;
    bool integral = true;
    for (Eigen::Index v = 0; v < es.eigenvectors().cols(); ++v) {
      Eigen::VectorXcd w = es.eigenvectors().col(v);
      if (std::abs(w(id_class)) < 1e-12) {
        integral = false;
        break;
      }
      w /= w(id_class);
      double s = 0;
      for (std::size_t j = 0; j < nc; ++j)
        s += std::norm(w(j)) / size[j];
      const double d = std::sqrt(order / s);
      const double rd = std::round(d);
      if (std::abs(d - rd) > 1e-6) {
        integral = false;
        break;
      }
      degrees.push_back(static_cast<std::uint64_t>(rd));
    }
    if (!integral)
      continue;
    std::sort(degrees.begin(), degrees.end());
    std::uint64_t sum = 0;
    for (auto d : degrees)
      sum += d * d;
    if (sum != g.order())
      continue;
    r.degrees = degrees;
    r.sum_of_squares_ok = true;
    break;
  }
  if (!r.sum_of_squares_ok)
    throw std::runtime_error("class algebra eigenvectors did not separate the characters");
  // The trivial character accounts for one degree 1.
  r.d_min = r.degrees.size() > 1 ? r.degrees[1] : 1;
  r.c = r.d_min > 1 ? std::log(double(r.d_min)) / std::log(order) : 0.0;
  return r;
}

void to_json(nlohmann::json& j, const KestenReport& r)
{
  j = {{"M", r.M},
       {"l", r.l},
       {"bound", r.bound},
       {"sphere", r.sphere},
       {"exact_return", r.exact_return.str()},
       {"exact_return_value", to_double(r.exact_return)}};
}

void to_json(nlohmann::json& j, const DiophantineReport& r)
{
  j = {{"holds", r.holds},
       {"alpha", r.alpha},
       {"beta", r.beta},
       {"subgroups_checked", r.subgroups_checked},
       {"cosets_checked", r.cosets_checked}};
  j["worst_ratio"] = std::isfinite(r.worst_ratio) ? nlohmann::json(r.worst_ratio) : nlohmann::json(nullptr);
  j["worst_subgroup"] = r.worst_subgroup ? nlohmann::json(*r.worst_subgroup) : nlohmann::json(nullptr);
  j["worst_coset_rep"] = r.worst_coset_rep ? nlohmann::json(*r.worst_coset_rep) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const FlatteningStep& s)
{
  j = {{"m", s.m},       {"l2", s.l2},         {"bound", s.bound},
       {"next_l2", s.next_l2}, {"flag", s.flag}, {"a_size", s.a_size}};
  j["tripling"] = std::isnan(s.tripling) ? nlohmann::json(nullptr) : nlohmann::json(s.tripling);
  j["min_mass_times_size"] = s.min_mass_times_size;
}

void to_json(nlohmann::json& j, const EscapeProbe& r)
{
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.samples)
    samples.push_back(
        {{"l", s.l}, {"prob", s.prob}, {"max_coset_sq", s.max_coset_sq}, {"prob_double", s.prob_double}});
  j = {{"index", r.index},
       {"samples", samples},
       {"fitted_exponent", r.fitted_exponent},
       {"cauchy_schwarz", r.cauchy_schwarz},
       {"even_monotone", r.even_monotone},
       {"limit", r.limit}};
}

void to_json(nlohmann::json& j, const QuasiRandomReport& r)
{
  j = {{"degrees", r.degrees},
       {"d_min", r.d_min},
       {"c", r.c},
       {"sum_of_squares_ok", r.sum_of_squares_ok},
       {"method", r.method}};
}

}  // namespace ffexp
