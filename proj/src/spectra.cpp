#include "ffexp/spectra.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ffexp/measure.hpp"
#include "ffexp/sl2.hpp"

namespace ffexp {

namespace {

/// Fixed block count so reductions do not depend on the thread count.
constexpr std::size_t kBlocks = 64;

template <class Fn>
void for_blocks(std::size_t n, unsigned threads, Fn fn)
{
  auto run = [&](unsigned t, unsigned stride) {
    for (std::size_t b = t; b < kBlocks; b += stride)
      fn(b, n * b / kBlocks, n * (b + 1) / kBlocks);
  };
  if (threads <= 1 || n < 4096) {
    run(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back(run, t, threads);
  for (auto& th : pool)
    th.join();
}

double dot(const std::vector<double>& a, const std::vector<double>& b, unsigned threads)
{
  std::vector<double> part(kBlocks, 0.0);
  for_blocks(a.size(), threads, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i)
      s += a[i] * b[i];
    part[blk] = s;
  });
  double s = 0;
  for (double x : part)
    s += x;
  return s;
}

/// Basis size and memory cap for the Krylov-accelerated power iteration.
constexpr std::size_t kKrylovSteps = 40;
constexpr std::size_t kKrylovBytes = std::size_t(256) << 20;

/// Scales v to unit length; returns the old norm.
double normalize(std::vector<double>& v, unsigned threads)
{
  const double nv = std::sqrt(dot(v, v, threads));
  if (nv > 0)
    for (double& x : v)
      x /= nv;
  return nv;
}

void remove_mean(std::vector<double>& v, unsigned threads)
{
  std::vector<double> part(kBlocks, 0.0);
  for_blocks(v.size(), threads, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i)
      s += v[i];
    part[blk] = s;
  });
  double s = 0;
  for (double x : part)
    s += x;
  const double mean = s / double(v.size());
  for (double& x : v)
    x -= mean;
}

std::vector<int> two_colour(const CayleyGraph& g, bool& odd_cycle, std::size_t& components)
{
  std::vector<int> colour(g.size(), -1);
  odd_cycle = false;
  components = 0;
  std::deque<Id> queue;
  for (Id s = 0; s < g.size(); ++s) {
    if (colour[s] >= 0)
      continue;
    ++components;
    colour[s] = 0;
    queue.push_back(s);
    while (!queue.empty()) {
      Id x = queue.front();
      queue.pop_front();
      for (std::size_t k = 0; k < g.degree(); ++k) {
        Id y = g.neighbor(x, k);
        if (colour[y] < 0) {
          colour[y] = 1 - colour[x];
          queue.push_back(y);
        } else if (colour[y] == colour[x]) {
          odd_cycle = true;
        }
      }
    }
  }
  return colour;
}

Eigen::MatrixXd dense_operator(const CayleyGraph& graph)
{
  const std::size_t n = graph.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
  const double w = 1.0 / graph.degree();
  for (Id x = 0; x < n; ++x)
    for (std::size_t k = 0; k < graph.degree(); ++k)
      t(x, graph.neighbor(x, k)) += w;
  return t;
}

SpectralReport exact_dense(const CayleyGraph& graph, const SpectralOptions& opts)
{
  const std::size_t n = graph.size();
  if (n > kExactDenseLimit)
    throw std::invalid_argument("ExactDense needs |G| <= " + std::to_string(kExactDenseLimit));
  SpectralReport r;
  r.method = SpectralMethod::ExactDense;
  r.seed = opts.seed;
  if (n == 1) {
    r.lambda = r.lower = r.upper = 0;
    return r;
  }
  Eigen::MatrixXd t = dense_operator(graph);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense eigensolver failed");
  const auto& ev = es.eigenvalues();
  const Eigen::Index top = Eigen::Index(n) - 2;
  const double lo = ev(0), hi = ev(top);
  r.lambda2 = std::min(1.0, hi);
  r.lambda = std::clamp(std::max(std::abs(lo), std::abs(hi)), 0.0, 1.0);
  for (Eigen::Index i : {Eigen::Index(0), top}) {
    Eigen::VectorXd v = es.eigenvectors().col(i);
    r.residual = std::max(r.residual, (t * v - ev(i) * v).norm());
  }
  r.lower = r.upper = r.lambda;
  return r;
}

SpectralReport power_iteration(const CayleyGraph& graph, const SpectralOptions& opts)
{
  const std::size_t n = graph.size();
  SpectralReport r;
  r.method = SpectralMethod::PowerIteration;
  r.seed = opts.seed;
  if (n == 1) {
    r.lambda = r.lower = r.upper = 0;
    return r;
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  std::vector<double> v(n), half(n), w(n);
  for (double& x : v)
    x = gauss(rng);
  remove_mean(v, opts.threads);
  normalize(v, opts.threads);

  // A = P T^2 P on mean-zero functions; one iteration is one application of A.
  auto apply_a = [&](const std::vector<double>& x, std::vector<double>& out) {
    graph.apply(x, half, opts.threads);
    graph.apply(half, out, opts.threads);
    remove_mean(out, opts.threads);
  };

  // Restarted Krylov acceleration of the power step: each cycle builds an
  // m-step Lanczos basis from the current vector and restarts from the top
  // Ritz vector.
  const std::size_t m = std::clamp<std::size_t>(kKrylovBytes / (8 * n), 2, kKrylovSteps);
  std::vector<std::vector<double>> q;
  double theta = 0;
  unsigned used = 0;
  r.converged = false;
  while (used < opts.max_iterations) {
    q.assign(1, v);
    std::vector<double> alpha, beta;
    for (std::size_t j = 0; j < m && used < opts.max_iterations; ++j) {
      apply_a(q[j], w);
      ++used;
      alpha.push_back(dot(q[j], w, opts.threads));
      // Full reorthogonalization, twice.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& qi : q) {
          const double c = dot(qi, w, opts.threads);
          for (std::size_t i = 0; i < n; ++i)
            w[i] -= c * qi[i];
        }
      const double b = std::sqrt(dot(w, w, opts.threads));
      if (j + 1 == m || b < 1e-14)
        break;
      beta.push_back(b);
      for (double& x : w)
        x /= b;
      q.push_back(w);
    }
    const Eigen::Index k = Eigen::Index(alpha.size());
    Eigen::VectorXd diag(k), sub(std::max<Eigen::Index>(k - 1, 0));
    for (Eigen::Index i = 0; i < k; ++i)
      diag(i) = alpha[std::size_t(i)];
    for (Eigen::Index i = 0; i + 1 < k; ++i)
      sub(i) = beta[std::size_t(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd y = es.eigenvectors().col(k - 1);
    std::fill(v.begin(), v.end(), 0.0);
    for (Eigen::Index i = 0; i < k; ++i)
      for (std::size_t x = 0; x < n; ++x)
        v[x] += y(i) * q[std::size_t(i)][x];
    remove_mean(v, opts.threads);
    if (normalize(v, opts.threads) == 0) {
      theta = 0;
      r.residual = 0;
      r.converged = true;
      break;
    }

    apply_a(v, w);
    theta = dot(v, w, opts.threads);
    for (std::size_t i = 0; i < n; ++i)
      w[i] -= theta * v[i];
    r.residual = std::sqrt(dot(w, w, opts.threads));
    r.iterations = used;
    if (r.residual < opts.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.lambda = std::clamp(std::sqrt(std::max(theta, 0.0)), 0.0, 1.0);
  r.lower = r.lambda;
  r.upper = r.converged ? r.lambda : 1.0;
  if (r.converged && r.lambda > 0) {
    // Any weight on the +lambda eigenspace of T means lambda_2 = lambda.
    graph.apply(v, half, opts.threads);
    const double s = dot(v, half, opts.threads);
    if ((1 + s / r.lambda) / 2 > 1e-3)
      r.lambda2 = r.lambda;
  }
  return r;
}

}  // namespace

CayleyGraph::CayleyGraph(std::shared_ptr<const FiniteGroup> g, std::vector<Id> gens)
    : group_(std::move(g)), gens_(std::move(gens))
{
  if (gens_.empty())
    throw std::invalid_argument("Cayley graph needs a nonempty generating multiset");
  std::map<Id, long> balance;
  for (Id s : gens_) {
    if (s >= group_->order())
      throw std::invalid_argument("generator id outside the group");
    ++balance[s];
    --balance[group_->inv(s)];
  }
  for (const auto& [s, c] : balance)
    if (c != 0)
      throw std::invalid_argument("generating multiset is not symmetric");
  for (Id s : gens_)
    nb_.push_back(group_->left_mul_table(s));
}

void CayleyGraph::apply(const std::vector<double>& f, std::vector<double>& out, unsigned threads) const
{
  const std::size_t n = size();
  if (f.size() != n)
    throw std::invalid_argument("vector length differs from |G|");
  out.resize(n);
  const double w = 1.0 / degree();
  for_blocks(n, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t x = lo; x < hi; ++x) {
      double s = 0;
      for (const auto& table : nb_)
        s += f[table[x]];
      out[x] = s * w;
    }
  });
}

std::vector<std::uint32_t> CayleyGraph::adjacency_counts() const
{
  const std::size_t n = size();
  if (n > kExactDenseLimit)
    throw std::invalid_argument("adjacency matrix too large");
  std::vector<std::uint32_t> a(n * n, 0);
  for (Id x = 0; x < n; ++x)
    for (const auto& table : nb_)
      ++a[std::size_t{x} * n + table[x]];
  return a;
}

bool CayleyGraph::connected() const
{
  bool odd;
  std::size_t comps;
  two_colour(*this, odd, comps);
  return comps == 1;
}

bool CayleyGraph::bipartite() const
{
  bool odd;
  std::size_t comps;
  two_colour(*this, odd, comps);
  return !odd;
}

CayleyGraph build_cayley(std::shared_ptr<const FiniteGroup> g, std::vector<Id> gens)
{
  return CayleyGraph(std::move(g), std::move(gens));
}

std::string to_string(SpectralMethod m)
{
  return m == SpectralMethod::ExactDense ? "ExactDense" : "PowerIteration";
}

SpectralMethod spectral_method_from_string(const std::string& s)
{
  if (s == "ExactDense" || s == "exact")
    return SpectralMethod::ExactDense;
  if (s == "PowerIteration" || s == "power")
    return SpectralMethod::PowerIteration;
  throw std::invalid_argument("unknown spectral method: " + s);
}

SpectralReport lambda(const CayleyGraph& graph, const SpectralOptions& opts)
{
  bool odd;
  std::size_t comps;
  two_colour(graph, odd, comps);
  if (graph.size() > 1 && (comps > 1 || !odd)) {
    if (opts.method == SpectralMethod::ExactDense && graph.size() > kExactDenseLimit)
      throw std::invalid_argument("ExactDense needs |G| <= " + std::to_string(kExactDenseLimit));
    SpectralReport r;
    r.method = opts.method;
    r.seed = opts.seed;
    r.lambda = r.lower = r.upper = 1;
    r.certificate = comps > 1 ? "disconnected" : "bipartite";
    if (comps > 1)
      r.lambda2 = 1.0;
    else if (opts.method == SpectralMethod::ExactDense)
      r.lambda2 = exact_dense(graph, opts).lambda2;
    return r;
  }
  return opts.method == SpectralMethod::ExactDense ? exact_dense(graph, opts) : power_iteration(graph, opts);
}

std::vector<double> spectrum(const CayleyGraph& graph)
{
  if (graph.size() > kExactDenseLimit)
    throw std::invalid_argument("spectrum needs |G| <= " + std::to_string(kExactDenseLimit));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_operator(graph), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

TraceMoment trace_moment(const CayleyGraph& graph, unsigned l, std::optional<std::uint64_t> d_min, bool exact)
{
  TraceMoment t;
  t.l = l;
  const double n = double(graph.size());
  if (exact) {
    Rational ret(1);
    if (l > 0) {
      auto step = Measure<Rational>::uniform(graph.group_ptr(), graph.gens());
      ret = k_fold(step, l).at(FiniteGroup::identity());
    }
    t.exact_return = ret;
    t.trace = n * ret.convert_to<double>();
  } else {
    std::vector<double> p(graph.size(), 0.0), q(graph.size());
    p[FiniteGroup::identity()] = 1;
    const double w = 1.0 / graph.degree();
    for (unsigned s = 0; s < l; ++s) {
      std::fill(q.begin(), q.end(), 0.0);
      for (Id x = 0; x < graph.size(); ++x) {
        if (p[x] == 0)
          continue;
        for (std::size_t k = 0; k < graph.degree(); ++k)
          q[graph.neighbor(x, k)] += p[x] * w;
      }
      p.swap(q);
    }
    t.trace = n * p[FiniteGroup::identity()];
  }
  if (d_min && l > 0 && l % 2 == 0)
    t.bound = std::pow(t.trace / double(*d_min), 1.0 / l);
  return t;
}

double expansion_bound(const SpectralReport& report)
{
  const double l2 = report.lambda2 ? *report.lambda2 : report.lambda;
  return std::max(0.0, (1.0 - l2) / 2.0);
}

double cut_ratio(const CayleyGraph& graph, const std::vector<char>& in_b)
{
  const std::size_t n = graph.size();
  std::size_t b = 0, cut = 0;
  for (Id x = 0; x < n; ++x) {
    if (!in_b[x])
      continue;
    ++b;
    for (std::size_t k = 0; k < graph.degree(); ++k)
      cut += !in_b[graph.neighbor(x, k)];
  }
  const std::size_t side = std::min(b, n - b);
  if (side == 0)
    throw std::invalid_argument("cut needs both sides nonempty");
  return double(cut) / (double(graph.degree()) * double(side));
}

CutWitness sampled_cuts(const CayleyGraph& graph, std::size_t samples, std::mt19937_64& rng)
{
  const std::size_t n = graph.size();
  if (n < 2)
    throw std::invalid_argument("cuts need at least two vertices");
  CutWitness w;
  w.min_ratio = std::numeric_limits<double>::infinity();
  std::vector<char> in_b(n);
  auto consider = [&]() {
    std::size_t b = std::count(in_b.begin(), in_b.end(), 1);
    if (b == 0 || b == n)
      return;
    ++w.cuts;
    const double r = cut_ratio(graph, in_b);
    if (r < w.min_ratio) {
      w.min_ratio = r;
      w.argmin.clear();
      for (Id x = 0; x < n; ++x)
        if (in_b[x])
          w.argmin.push_back(x);
    }
  };
  if (n <= 20) {
    w.exhaustive = true;
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      for (std::size_t x = 0; x < n; ++x)
        in_b[x] = (mask >> x) & 1;
      consider();
    }
    return w;
  }
  if (n > 2000)
    throw std::invalid_argument("cut sampling is limited to |G| <= 2000");
  std::uniform_int_distribution<Id> vertex(0, Id(n - 1));
  std::uniform_real_distribution<double> unit(0, 1);
  for (std::size_t s = 0; s < samples; ++s) {
    std::fill(in_b.begin(), in_b.end(), 0);
    switch (s % 3) {
      case 0: {
        const double density = unit(rng);
        for (auto& c : in_b)
          c = unit(rng) < density;
        break;
      }
      case 1: {
        // Breadth-first ball around a random vertex, stopped at a random size.
        const std::size_t target = 1 + rng() % (n / 2);
        std::deque<Id> queue{vertex(rng)};
        in_b[queue.front()] = 1;
        std::size_t size = 1;
        while (!queue.empty() && size < target) {
          Id x = queue.front();
          queue.pop_front();
          for (std::size_t k = 0; k < graph.degree() && size < target; ++k) {
            Id y = graph.neighbor(x, k);
            if (!in_b[y]) {
              in_b[y] = 1;
              ++size;
              queue.push_back(y);
            }
          }
        }
        break;
      }
      default: {
        Id x = vertex(rng);
        const std::size_t len = 1 + rng() % n;
        for (std::size_t i = 0; i < len; ++i) {
          in_b[x] = 1;
          x = graph.neighbor(x, rng() % graph.degree());
        }
        break;
      }
    }
    consider();
  }
  return w;
}

ScanResult family_scan(const std::vector<RatMatrix>& gens, const AdmissibleSpec& spec, const ScanOptions& opts)
{
  return family_scan(gens, enumerate_admissible(spec), opts);
}

ScanResult family_scan(const std::vector<RatMatrix>& gens, const std::vector<Modulus>& moduli,
                       const ScanOptions& opts)
{
  ScanResult out;
  out.rows.resize(moduli.size());
  auto work = [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    ScanRow& row = out.rows[i];
    row.f = moduli[i].poly().to_string();
    row.degree = moduli[i].degree();
    try {
      auto g = std::make_shared<GroupEnum>(generate_mod(gens, moduli[i], Quotient::Linear, opts.budget));
      row.order = g->order();
      CayleyGraph graph(g, g->generator_ids());
      SpectralOptions so = opts.spectral;
      so.threads = 1;
      if (opts.prefer_exact && g->order() <= kExactDenseLimit)
        so.method = SpectralMethod::ExactDense;
      else if (so.method == SpectralMethod::ExactDense && g->order() > kExactDenseLimit)
        so.method = SpectralMethod::PowerIteration;
      auto rep = lambda(graph, so);
      row.lambda = rep.lambda;
      row.gap = 1 - rep.lambda;
      row.method = to_string(rep.method);
      row.residual = rep.residual;
      row.converged = rep.converged;
      row.flagged = rep.lambda >= 1 - opts.gap_floor;
    } catch (const BudgetExceeded& e) {
      row.skipped = true;
      row.order = e.reached;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const unsigned threads = std::max(1u, opts.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < moduli.size(); ++i)
      work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (std::size_t i = t; i < moduli.size(); i += threads)
          work(i);
      });
    for (auto& th : pool)
      th.join();
  }
  for (const auto& row : out.rows) {
    if (row.skipped)
      continue;
    if (!out.min_gap || row.gap < *out.min_gap) {
      out.min_gap = row.gap;
      out.argmin_f = row.f;
    }
  }
  return out;
}

std::string to_csv(const ScanResult& r)
{
  std::ostringstream os;
  os.precision(17);
  os << "f,deg_f,order,lambda,one_minus_lambda,method,seconds\n";
  for (const auto& row : r.rows) {
    os << '"' << row.f << "\"," << row.degree << ',';
    if (row.skipped)
      os << ",,,skipped,";
    else
      os << row.order << ',' << row.lambda << ',' << row.gap << ',' << row.method << ',';
    os << row.seconds << '\n';
  }
  return os.str();
}

void to_json(nlohmann::json& j, const SpectralReport& r)
{
  j = {{"lambda", r.lambda},
       {"lambda2", r.lambda2 ? nlohmann::json(*r.lambda2) : nlohmann::json(nullptr)},
       {"method", to_string(r.method)},
       {"iterations", r.iterations},
       {"residual", r.residual},
       {"seed", r.seed},
       {"converged", r.converged},
       {"bracket", {r.lower, r.upper}},
       {"certificate", r.certificate}};
  auto tm = nlohmann::json::array();
  for (const auto& [l, tr] : r.trace_moments)
    tm.push_back({l, tr});
  j["trace_moments"] = tm;
}

void to_json(nlohmann::json& j, const TraceMoment& r)
{
  j = {{"l", r.l}, {"trace", r.trace}};
  j["exact_return"] = r.exact_return ? nlohmann::json(r.exact_return->str()) : nlohmann::json(nullptr);
  j["bound"] = r.bound ? nlohmann::json(*r.bound) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const CutWitness& r)
{
  j = {{"cuts", r.cuts}, {"exhaustive", r.exhaustive}, {"min_ratio", r.min_ratio}, {"argmin", r.argmin}};
}

void to_json(nlohmann::json& j, const ScanRow& r)
{
  j = {{"f", r.f},         {"deg_f", r.degree},         {"order", r.order},   {"lambda", r.lambda},
       {"gap", r.gap},     {"method", r.method},        {"seconds", r.seconds}, {"residual", r.residual},
       {"converged", r.converged}, {"skipped", r.skipped}, {"flagged", r.flagged}};
}

void to_json(nlohmann::json& j, const ScanResult& r)
{
  j = {{"rows", r.rows},
       {"min_gap", r.min_gap ? nlohmann::json(*r.min_gap) : nlohmann::json(nullptr)},
       {"argmin_f", r.argmin_f ? nlohmann::json(*r.argmin_f) : nlohmann::json(nullptr)}};
}

}  // namespace ffexp
